//! Corrector potentials and guided scores for interpolated targets.
//!
//! Given two score fields s1, s2 the three interpolation families share one
//! shape: a convex combination of the scores drives the particle, and a scalar
//! potential psi (zero for the linear mixture) reweights it. State-dependent
//! combination weights are reconstructed from the tracked log-ratio
//! ell = log(q2/q1); they are always computed through a log-space logistic so
//! ell in the +/- hundreds cannot overflow.
//!
//! Centering of psi is deliberately NOT done here: the integrator accumulates
//! the uncentered potential and the ensemble-level softmax cancels the
//! particle-independent centering term exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dist_sq, dot, logistic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationKind {
    /// Normalized geometric average q1^(1-beta) q2^beta.
    Geometric,
    /// Convex mixture (1-beta) q1 + beta q2; no potential, ratio tracking only.
    Mixture,
    /// Hellinger interpolation ((1-beta) sqrt(q1) + beta sqrt(q2))^2.
    FisherRao,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationSpec {
    pub kind: InterpolationKind,
    pub beta: f64,
}

impl InterpolationSpec {
    pub fn new(kind: InterpolationKind, beta: f64) -> Result<Self> {
        let spec = Self { kind, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() {
            return Err(Error::invalid("beta must be finite"));
        }
        match self.kind {
            InterpolationKind::Geometric => Ok(()),
            InterpolationKind::Mixture | InterpolationKind::FisherRao => {
                if (0.0..=1.0).contains(&self.beta) {
                    Ok(())
                } else {
                    Err(Error::invalid(format!(
                        "beta = {} outside [0, 1] for this interpolation kind",
                        self.beta
                    )))
                }
            }
        }
    }
}

/// Pointwise corrector output: the drift's score part, the uncentered
/// potential, and the combination weights that produced the score.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidedEvaluation {
    pub guided_score: Vec<f64>,
    /// Uncentered potential g(x); the reaction module centers it.
    pub psi: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

fn check_dims(s1: &[f64], s2: &[f64]) -> Result<()> {
    if s1.len() != s2.len() || s1.is_empty() {
        return Err(Error::invalid(format!(
            "score dimensions disagree: {} vs {}",
            s1.len(),
            s2.len()
        )));
    }
    Ok(())
}

fn combine(s1: &[f64], s2: &[f64], a1: f64, a2: f64) -> Vec<f64> {
    s1.iter().zip(s2).map(|(x, y)| a1 * x + a2 * y).collect()
}

/// Geometric average: guided score (1-beta) s1 + beta s2 and potential
/// psi = (sigma_t^2 / 2) beta (beta - 1) |s1 - s2|^2.
pub fn geometric_eval(s1: &[f64], s2: &[f64], beta: f64, sigma_t: f64) -> Result<GuidedEvaluation> {
    check_dims(s1, s2)?;
    let a1 = 1.0 - beta;
    let psi = 0.5 * sigma_t * sigma_t * beta * (beta - 1.0) * dist_sq(s1, s2);
    Ok(GuidedEvaluation {
        guided_score: combine(s1, s2, a1, beta),
        psi,
        alpha1: a1,
        alpha2: beta,
    })
}

/// Hellinger interpolation: weights alpha2 = beta e^{ell/2} / ((1-beta) + beta e^{ell/2})
/// reconstructed from the tracked log-ratio, guided score alpha1 s1 + alpha2 s2,
/// and potential psi = -(sigma_t^2 / 4) alpha1 alpha2 |s1 - s2|^2.
pub fn fisher_rao_eval(
    s1: &[f64],
    s2: &[f64],
    ell: f64,
    beta: f64,
    sigma_t: f64,
) -> Result<GuidedEvaluation> {
    check_dims(s1, s2)?;
    let a2 = ratio_weight(ell / 2.0, beta);
    let a1 = 1.0 - a2;
    let psi = -0.25 * sigma_t * sigma_t * a1 * a2 * dist_sq(s1, s2);
    Ok(GuidedEvaluation {
        guided_score: combine(s1, s2, a1, a2),
        psi,
        alpha1: a1,
        alpha2: a2,
    })
}

/// Convex mixture: weights omega2 = beta e^ell / ((1-beta) + beta e^ell),
/// guided score omega1 s1 + omega2 s2, and no potential at all.
pub fn mixture_eval(s1: &[f64], s2: &[f64], ell: f64, beta: f64) -> Result<GuidedEvaluation> {
    check_dims(s1, s2)?;
    let w2 = ratio_weight(ell, beta);
    let w1 = 1.0 - w2;
    Ok(GuidedEvaluation {
        guided_score: combine(s1, s2, w1, w2),
        psi: 0.0,
        alpha1: w1,
        alpha2: w2,
    })
}

/// beta e^z / ((1 - beta) + beta e^z) as a logistic in log space.
fn ratio_weight(z: f64, beta: f64) -> f64 {
    if beta <= 0.0 {
        0.0
    } else if beta >= 1.0 {
        1.0
    } else {
        logistic(z + (beta / (1.0 - beta)).ln())
    }
}

/// Dispatch on the interpolation kind. `ell` is ignored by the geometric kind.
pub fn interp_eval(
    spec: &InterpolationSpec,
    s1: &[f64],
    s2: &[f64],
    ell: f64,
    sigma_t: f64,
) -> Result<GuidedEvaluation> {
    match spec.kind {
        InterpolationKind::Geometric => geometric_eval(s1, s2, spec.beta, sigma_t),
        InterpolationKind::FisherRao => fisher_rao_eval(s1, s2, ell, spec.beta, sigma_t),
        InterpolationKind::Mixture => mixture_eval(s1, s2, ell, spec.beta),
    }
}

/// Allocation-free scalar form of [`interp_eval`] for 1-D fields; the grid
/// oracle calls this once per cell per sub-step. Returns
/// (guided_score, psi, alpha1, alpha2). Must agree with the vector path.
pub fn interp_eval_1d(
    spec: &InterpolationSpec,
    s1: f64,
    s2: f64,
    ell: f64,
    sigma_t: f64,
) -> (f64, f64, f64, f64) {
    let gap = s1 - s2;
    let gap_sq = gap * gap;
    let (a1, a2, psi) = match spec.kind {
        InterpolationKind::Geometric => {
            let b = spec.beta;
            (1.0 - b, b, 0.5 * sigma_t * sigma_t * b * (b - 1.0) * gap_sq)
        }
        InterpolationKind::FisherRao => {
            let a2 = ratio_weight(ell / 2.0, spec.beta);
            let a1 = 1.0 - a2;
            (a1, a2, -0.25 * sigma_t * sigma_t * a1 * a2 * gap_sq)
        }
        InterpolationKind::Mixture => {
            let w2 = ratio_weight(ell, spec.beta);
            (1.0 - w2, w2, 0.0)
        }
    };
    (a1 * s1 + a2 * s2, psi, a1, a2)
}

/// Deterministic drift of the tracked log-ratio along a particle trajectory:
///
///   d ell = (dt_ell + <v_guided, grad ell> + (sigma^2/2) lap ell) dt
///           + sigma <grad ell, dW>,
///
/// with grad ell = s2 - s1, lap ell = div s2 - div s1, and
/// dt_ell = <f, grad ell> + (sigma^2/2) lap ell
///          - (sigma^2/2)(lap ell + |s2|^2 - |s1|^2).
///
/// Only the dt part is returned; the caller adds the noise term with the SAME
/// Brownian increment used for the state update.
#[allow(clippy::too_many_arguments)]
pub fn logratio_drift(
    s1: &[f64],
    s2: &[f64],
    div_s1: f64,
    div_s2: f64,
    f_t_x: &[f64],
    v_guided: &[f64],
    sigma_t: f64,
) -> Result<f64> {
    check_dims(s1, s2)?;
    if f_t_x.len() != s1.len() || v_guided.len() != s1.len() {
        return Err(Error::invalid("drift vectors disagree with score dimension"));
    }
    let grad_ell: Vec<f64> = s2.iter().zip(s1).map(|(b, a)| b - a).collect();
    let lap_ell = div_s2 - div_s1;
    let half_sig2 = 0.5 * sigma_t * sigma_t;
    let norm_gap: f64 = crate::numerics::norm_sq(s2) - crate::numerics::norm_sq(s1);
    let dt_ell = dot(f_t_x, &grad_ell) + half_sig2 * lap_ell - half_sig2 * (lap_ell + norm_gap);
    Ok(dt_ell + dot(v_guided, &grad_ell) + half_sig2 * lap_ell)
}

/// Reaction rate equivalent to transporting mu by the field v:
/// psi = -div v - <v, grad log mu>.
pub fn drift_to_fr_rate(v: &[f64], div_v: f64, score: &[f64]) -> f64 {
    -div_v - dot(v, score)
}

/// Reaction rate equivalent to diffusing mu at strength sigma_t:
/// psi = (sigma_t^2 / 2)(lap log mu + |grad log mu|^2).
pub fn diffusion_to_fr_rate(score: &[f64], score_div: f64, sigma_t: f64) -> f64 {
    0.5 * sigma_t * sigma_t * (score_div + crate::numerics::norm_sq(score))
}

/// Velocity field equivalent to diffusion: v = -(sigma_t^2 / 2) grad log mu.
pub fn diffusion_to_drift(score: &[f64], sigma_t: f64) -> Vec<f64> {
    let c = -0.5 * sigma_t * sigma_t;
    score.iter().map(|s| c * s).collect()
}
