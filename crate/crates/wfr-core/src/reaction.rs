//! Ensemble-level reaction: self-normalized estimators, effective sample size,
//! resampling, and the equivalent birth/death jump process.
//!
//! The centering term of the reaction PDE is never estimated inside the
//! integrator; it is particle-independent, so the softmax normalization used
//! by every estimator here cancels it exactly.

use serde::{Deserialize, Serialize};

use crate::ensemble::{normalized_weights, Ensemble};
use crate::error::{Error, Result};
use crate::numerics::logsumexp;
use crate::rng::{RngStream, StreamPurpose};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleKind {
    /// Independent categorical draws; the literal resampling rule.
    Multinomial,
    /// Low-variance stratified sweep; the default.
    Systematic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleTrigger {
    /// Resample after every n steps.
    EveryN { n: usize },
    /// Resample when ESS < fraction * K.
    EssBelow { fraction: f64 },
    /// Never resample.
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampleScheme {
    pub kind: ResampleKind,
    pub trigger: ResampleTrigger,
}

impl Default for ResampleScheme {
    fn default() -> Self {
        Self {
            kind: ResampleKind::Systematic,
            trigger: ResampleTrigger::EssBelow { fraction: 0.5 },
        }
    }
}

impl ResampleScheme {
    pub fn validate(&self) -> Result<()> {
        match self.trigger {
            ResampleTrigger::EveryN { n } => {
                if n == 0 {
                    return Err(Error::invalid("resample trigger every_n needs n >= 1"));
                }
            }
            ResampleTrigger::EssBelow { fraction } => {
                if !(fraction > 0.0 && fraction <= 1.0) {
                    return Err(Error::invalid("ess_below fraction must be in (0, 1]"));
                }
            }
            ResampleTrigger::Never => {}
        }
        Ok(())
    }
}

/// Self-normalized importance-sampling estimate of E[phi] under the weighted
/// empirical law.
pub fn snis_expectation<F>(e: &Ensemble, phi: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let w = normalized_weights(e)?;
    Ok(e.particles
        .iter()
        .zip(&w)
        .filter(|(p, _)| p.alive)
        .map(|(p, &wk)| wk * phi(&p.x))
        .sum())
}

/// SNIS mean and variance per coordinate.
pub fn snis_mean_var(e: &Ensemble) -> Result<(Vec<f64>, Vec<f64>)> {
    let w = normalized_weights(e)?;
    let mut mean = vec![0.0; e.dim];
    let mut second = vec![0.0; e.dim];
    for (p, &wk) in e.particles.iter().zip(&w) {
        if !p.alive {
            continue;
        }
        for d in 0..e.dim {
            mean[d] += wk * p.x[d];
            second[d] += wk * p.x[d] * p.x[d];
        }
    }
    let var = second
        .iter()
        .zip(&mean)
        .map(|(s, m)| s - m * m)
        .collect();
    Ok((mean, var))
}

/// log of the average weight, log((1/K) sum_k exp(log_w_k)), over alive
/// particles. Estimates the log-normalizer accumulated since weights were
/// last reset.
pub fn log_normalizer_estimate(e: &Ensemble) -> Result<f64> {
    let logs: Vec<f64> = e
        .particles
        .iter()
        .filter(|p| p.alive)
        .map(|p| p.log_w)
        .collect();
    if logs.is_empty() {
        return Err(Error::DegenerateEnsemble("no alive particles".into()));
    }
    let z = logsumexp(&logs);
    if !z.is_finite() {
        return Err(Error::DegenerateEnsemble("all weights vanished".into()));
    }
    Ok(z - (logs.len() as f64).ln())
}

/// Effective sample size 1 / sum_k p_k^2; ranges over [1, K].
pub fn ess(e: &Ensemble) -> Result<f64> {
    let w = normalized_weights(e)?;
    let s: f64 = w.iter().map(|p| p * p).sum();
    Ok(1.0 / s)
}

/// Offspring of a systematic sweep with offset `u0` in [0, 1).
fn systematic_ancestors(weights: &[f64], u0: f64) -> Vec<usize> {
    let k = weights.len();
    let mut ancestors = Vec::with_capacity(k);
    let mut cum = 0.0;
    let mut j = 0usize;
    for (i, &w) in weights.iter().enumerate() {
        cum += w;
        while j < k && (u0 + j as f64) / k as f64 <= cum {
            ancestors.push(i);
            j += 1;
        }
    }
    // Rounding can starve the last stratum; assign it to the final positive
    // weight.
    while ancestors.len() < k {
        ancestors.push(weights.iter().rposition(|&w| w > 0.0).unwrap_or(k - 1));
    }
    ancestors
}

/// Replace the population by K offspring drawn from the normalized weights.
/// Offspring copy position and tracked log-ratio from their ancestor and
/// restart with log_w = 0; dead slots are never selected and disappear.
pub fn resample(e: &mut Ensemble, kind: ResampleKind, stream: RngStream) -> Result<()> {
    let w = normalized_weights(e)?;
    let k = e.len();
    let mut rng = stream.rng();
    let ancestors: Vec<usize> = match kind {
        ResampleKind::Systematic => {
            let u0: f64 = rng.random();
            systematic_ancestors(&w, u0)
        }
        ResampleKind::Multinomial => {
            // CDF with a binary search per draw.
            let mut cdf = Vec::with_capacity(k);
            let mut acc = 0.0;
            for &wi in &w {
                acc += wi;
                cdf.push(acc);
            }
            (0..k)
                .map(|_| {
                    let u: f64 = rng.random();
                    cdf.partition_point(|&c| c < u).min(k - 1)
                })
                .collect()
        }
    };
    let old = std::mem::take(&mut e.particles);
    e.particles = ancestors
        .iter()
        .map(|&a| {
            let mut p = old[a].clone();
            p.log_w = 0.0;
            debug_assert!(p.alive);
            p
        })
        .collect();
    Ok(())
}

/// Index of a jump target: k with probability proportional to the positive
/// weight excess (psi_k - mean_psi)^+ over alive particles.
pub fn jump_kernel_sample(
    e: &Ensemble,
    psi_values: &[f64],
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<usize> {
    let mean = jump_mean_psi(e, psi_values)?;
    let excess: Vec<f64> = e
        .particles
        .iter()
        .zip(psi_values)
        .map(|(p, &g)| if p.alive { (g - mean).max(0.0) } else { 0.0 })
        .collect();
    sample_excess(&excess, rng)
}

fn sample_excess(excess: &[f64], rng: &mut rand_chacha::ChaCha8Rng) -> Result<usize> {
    let total: f64 = excess.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoJumpTarget);
    }
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &x) in excess.iter().enumerate() {
        acc += x;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(excess.len() - 1)
}

fn jump_mean_psi(e: &Ensemble, psi_values: &[f64]) -> Result<f64> {
    if psi_values.len() != e.len() {
        return Err(Error::invalid("psi values must align with the ensemble"));
    }
    let w = normalized_weights(e)?;
    Ok(w.iter().zip(psi_values).map(|(wk, g)| wk * g).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JumpReport {
    pub n_jumps: usize,
}

/// One reaction step of the birth/death process: each particle dies with
/// probability lambda(x_k) h, lambda = (psi - mean_psi)^-, and is replaced by
/// a clone of a kernel-sampled target. The mean is refreshed from the current
/// ensemble before any rate is computed.
pub fn jump_step(
    e: &mut Ensemble,
    psi_values: &[f64],
    h: f64,
    step_index: u64,
    seed: u64,
) -> Result<JumpReport> {
    let mean = jump_mean_psi(e, psi_values)?;
    let lambdas: Vec<f64> = e
        .particles
        .iter()
        .zip(psi_values)
        .map(|(p, &g)| if p.alive { (-(g - mean)).max(0.0) } else { 0.0 })
        .collect();
    if let Some((i, &l)) = lambdas
        .iter()
        .enumerate()
        .find(|&(_, &l)| l * h > 1.0)
    {
        return Err(Error::StepSize(format!(
            "jump rate {l:.3e} at particle {i} exceeds 1/h; shrink the step"
        )));
    }
    let excess: Vec<f64> = e
        .particles
        .iter()
        .zip(psi_values)
        .map(|(p, &g)| if p.alive { (g - mean).max(0.0) } else { 0.0 })
        .collect();

    // Decide jumpers with per-particle streams, then draw targets from one
    // barrier stream in index order. Replacements are all taken from the
    // pre-step population.
    let jumpers: Vec<usize> = (0..e.len())
        .filter(|&i| {
            let l = lambdas[i];
            if l <= 0.0 {
                return false;
            }
            let mut rng =
                RngStream::per_particle(seed, StreamPurpose::JumpEvent, step_index, i as u64).rng();
            rng.random::<f64>() < l * h
        })
        .collect();
    if jumpers.is_empty() {
        return Ok(JumpReport { n_jumps: 0 });
    }
    let mut target_rng = RngStream::barrier(seed, StreamPurpose::JumpTarget, step_index).rng();
    let snapshot = e.particles.clone();
    let mut n_jumps = 0;
    for i in jumpers {
        let tgt = sample_excess(&excess, &mut target_rng)?;
        e.particles[i] = snapshot[tgt].clone();
        n_jumps += 1;
    }
    Ok(JumpReport { n_jumps })
}

/// Max-norm residual of the jump-process adjoint identity on a finite state
/// space: J*[p](x) must equal p(x)(psi(x) - E_p psi) when the rate and kernel
/// are built from the positive/negative parts of the centered potential.
pub fn discrete_adjoint_check(p: &[f64], psi: &[f64]) -> Result<f64> {
    if p.len() != psi.len() || p.is_empty() {
        return Err(Error::invalid("p and psi must be non-empty, equal length"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-8 || p.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::invalid("p must be strictly positive and sum to one"));
    }
    let mean: f64 = p.iter().zip(psi).map(|(pi, gi)| pi * gi).sum();
    let lambda: Vec<f64> = psi.iter().map(|g| (-(g - mean)).max(0.0)).collect();
    let plus: Vec<f64> = psi.iter().map(|g| (g - mean).max(0.0)).collect();
    let denom: f64 = plus.iter().zip(p).map(|(e, pi)| e * pi).sum();
    let outflow_total: f64 = lambda.iter().zip(p).map(|(l, pi)| l * pi).sum();
    let mut worst = 0.0f64;
    for x in 0..p.len() {
        // J(x|y) is y-independent here: (psi(x)-mean)^+ p(x) / denom.
        let inflow = if denom > 0.0 {
            outflow_total * plus[x] * p[x] / denom
        } else {
            0.0
        };
        let adjoint = inflow - p[x] * lambda[x];
        let reaction = p[x] * (psi[x] - mean);
        worst = worst.max((adjoint - reaction).abs());
    }
    Ok(worst)
}
