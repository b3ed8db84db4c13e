//! Analytic density families.
//!
//! Isotropic Gaussian mixtures are closed under the linear noising schedules
//! of [`crate::schedule::DiffusionSchedule`], which makes every quantity the
//! sampler needs (density, score, score divergence, time-t marginal) exact.
//! A quartic double-well target backs the Langevin baseline.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{logsumexp, norm_sq};
use crate::rng::standard_normal_vec;
use crate::schedule::DiffusionSchedule;

const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: Vec<f64>,
    /// Isotropic variance (> 0).
    pub var: f64,
    pub log_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureModel {
    components: Vec<GaussianComponent>,
    dim: usize,
}

impl GaussianMixtureModel {
    /// Build a mixture; log-weights are shifted so the weights sum to one.
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        let dim = components[0].mean.len();
        if dim == 0 {
            return Err(Error::invalid("component mean must be non-empty"));
        }
        for c in &components {
            if c.mean.len() != dim {
                return Err(Error::invalid("components disagree on dimension"));
            }
            if !(c.var > 0.0) || !c.var.is_finite() {
                return Err(Error::invalid("component variance must be positive"));
            }
            if !c.log_weight.is_finite() || c.mean.iter().any(|m| !m.is_finite()) {
                return Err(Error::invalid("component parameters must be finite"));
            }
        }
        let logs: Vec<f64> = components.iter().map(|c| c.log_weight).collect();
        let z = logsumexp(&logs);
        let mut components = components;
        for c in &mut components {
            c.log_weight -= z;
        }
        Ok(Self { components, dim })
    }

    /// Single Gaussian N(mean, var I).
    pub fn single(mean: Vec<f64>, var: f64) -> Result<Self> {
        Self::new(vec![GaussianComponent {
            mean,
            var,
            log_weight: 0.0,
        }])
    }

    /// Standard normal in `dim` dimensions.
    pub fn standard(dim: usize) -> Self {
        Self::single(vec![0.0; dim], 1.0).expect("standard normal is valid")
    }

    /// 1-D mixture from (mean, var, weight) triples.
    pub fn mixture_1d(specs: &[(f64, f64, f64)]) -> Result<Self> {
        let comps = specs
            .iter()
            .map(|&(m, v, w)| {
                if !(w > 0.0) {
                    return Err(Error::invalid("mixture weight must be positive"));
                }
                Ok(GaussianComponent {
                    mean: vec![m],
                    var: v,
                    log_weight: w.ln(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    /// Per-component log densities log w_j + log N(x; mu_j, v_j I).
    fn component_logs(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                c.log_weight
                    - 0.5 * self.dim as f64 * (LN_2PI + c.var.ln())
                    - crate::numerics::dist_sq(x, &c.mean) / (2.0 * c.var)
            })
            .collect()
    }

    /// log p(x) via log-sum-exp over components.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        logsumexp(&self.component_logs(x))
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.log_density(x).exp()
    }

    /// Exact score: grad log p = sum_j r_j(x) (-(x - mu_j)/v_j) with
    /// responsibilities r_j.
    pub fn score(&self, x: &[f64]) -> Vec<f64> {
        let logs = self.component_logs(x);
        let z = logsumexp(&logs);
        let mut s = vec![0.0; self.dim];
        for (c, &lj) in self.components.iter().zip(&logs) {
            let r = (lj - z).exp();
            for (si, (&xi, &mi)) in s.iter_mut().zip(x.iter().zip(&c.mean)) {
                *si += r * (-(xi - mi) / c.var);
            }
        }
        s
    }

    /// Exact div(score) = Laplacian of log p. For a mixture,
    /// sum_j r_j (|s_j|^2 - d/v_j) - |score|^2.
    pub fn score_divergence(&self, x: &[f64]) -> f64 {
        let logs = self.component_logs(x);
        let z = logsumexp(&logs);
        let d = self.dim as f64;
        let mut total = 0.0;
        let mut mean_score = vec![0.0; self.dim];
        for (c, &lj) in self.components.iter().zip(&logs) {
            let r = (lj - z).exp();
            let sj: Vec<f64> = x
                .iter()
                .zip(&c.mean)
                .map(|(&xi, &mi)| -(xi - mi) / c.var)
                .collect();
            total += r * (norm_sq(&sj) - d / c.var);
            for (acc, s) in mean_score.iter_mut().zip(&sj) {
                *acc += r * s;
            }
        }
        total - norm_sq(&mean_score)
    }

    /// Allocation-free 1-D evaluation of (log density, score, div score) in
    /// one pass; the grid oracle leans on this in its inner loop.
    pub fn eval_1d(&self, x: f64) -> (f64, f64, f64) {
        debug_assert_eq!(self.dim, 1);
        let term = |c: &GaussianComponent| {
            let d = x - c.mean[0];
            c.log_weight - 0.5 * (LN_2PI + c.var.ln()) - d * d / (2.0 * c.var)
        };
        let m = self
            .components
            .iter()
            .map(term)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        let mut s_acc = 0.0;
        let mut t_acc = 0.0;
        for c in &self.components {
            let r = (term(c) - m).exp();
            let sj = -(x - c.mean[0]) / c.var;
            z += r;
            s_acc += r * sj;
            t_acc += r * (sj * sj - 1.0 / c.var);
        }
        let score = s_acc / z;
        (m + z.ln(), score, t_acc / z - score * score)
    }

    /// Exact marginal after noising for time `t`: means contract by alpha_t,
    /// variances map to alpha_t^2 v + bridge_var(t), weights are unchanged.
    pub fn ou_forward_marginal(&self, t: f64, sched: &DiffusionSchedule) -> Self {
        let alpha = sched.log_alpha(t).exp();
        let bridge = sched.bridge_var(t);
        let components = self
            .components
            .iter()
            .map(|c| GaussianComponent {
                mean: c.mean.iter().map(|m| alpha * m).collect(),
                var: alpha * alpha * c.var + bridge,
                log_weight: c.log_weight,
            })
            .collect();
        Self {
            components,
            dim: self.dim,
        }
    }

    /// Draw one exact sample (categorical component choice, then Gaussian).
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut idx = self.components.len() - 1;
        for (j, c) in self.components.iter().enumerate() {
            acc += c.log_weight.exp();
            if u < acc {
                idx = j;
                break;
            }
        }
        let c = &self.components[idx];
        let sd = c.var.sqrt();
        standard_normal_vec(rng, self.dim)
            .iter()
            .zip(&c.mean)
            .map(|(z, m)| m + sd * z)
            .collect()
    }
}

/// Quartic double well V(x) = a (x^2 - m^2)^2 in one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleWellTarget {
    /// Quartic coefficient a; the barrier at the origin has height a m^4.
    pub barrier_height: f64,
    /// Wells sit at +/- m.
    pub well_separation: f64,
}

impl DoubleWellTarget {
    pub fn new(barrier_height: f64, well_separation: f64) -> Result<Self> {
        if !(barrier_height > 0.0 && well_separation > 0.0) {
            return Err(Error::invalid("double well needs a > 0 and m > 0"));
        }
        Ok(Self {
            barrier_height,
            well_separation,
        })
    }

    pub fn potential(&self, x: f64) -> f64 {
        let m2 = self.well_separation * self.well_separation;
        let q = x * x - m2;
        self.barrier_height * q * q
    }
}

/// Drift of the overdamped Langevin dynamics, -grad V.
pub trait OverdampedTarget {
    fn drift(&self, x: f64) -> f64;
}

impl OverdampedTarget for DoubleWellTarget {
    fn drift(&self, x: f64) -> f64 {
        let m2 = self.well_separation * self.well_separation;
        -4.0 * self.barrier_height * x * (x * x - m2)
    }
}

/// -grad V for the double well: -4 a x (x^2 - m^2).
pub fn langevin_drift(tgt: &DoubleWellTarget, x: f64) -> f64 {
    tgt.drift(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RngStream, StreamPurpose};

    fn fixture() -> GaussianMixtureModel {
        GaussianMixtureModel::mixture_1d(&[(0.0, 1.0, 0.5), (4.0, 1.0, 0.5)]).unwrap()
    }

    #[test]
    fn standard_normal_log_density_at_mode() {
        for d in [1usize, 3] {
            let m = GaussianMixtureModel::standard(d);
            let expected = -0.5 * d as f64 * LN_2PI;
            assert!((m.log_density(&vec![0.0; d]) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn translation_invariance_of_peak_value() {
        let m = GaussianMixtureModel::single(vec![2.0], 1.0).unwrap();
        assert!((m.log_density(&[2.0]) + 0.5 * LN_2PI).abs() < 1e-14);
    }

    #[test]
    fn symmetric_two_term_lse_by_hand() {
        // Equal mixture of N(0,1) and N(4,1) at x = 2: both terms are
        // (1/2) exp(-2)/sqrt(2 pi), so the density is exp(-2)/sqrt(2 pi).
        let m = fixture();
        let expected = (-2.0f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((m.log_density(&[2.0]) - expected.ln()).abs() < 1e-14);
    }

    #[test]
    fn single_gaussian_scores() {
        let m = GaussianMixtureModel::standard(1);
        assert!((m.score(&[3.0])[0] + 3.0).abs() < 1e-14);
        let m2 = GaussianMixtureModel::single(vec![2.0], 1.0).unwrap();
        assert!((m2.score(&[0.0])[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_mixture_score_vanishes_at_center() {
        let m = GaussianMixtureModel::mixture_1d(&[(-1.0, 1.0, 0.5), (1.0, 1.0, 0.5)]).unwrap();
        assert!(m.score(&[0.0])[0].abs() < 1e-14);
    }

    #[test]
    fn gaussian_score_divergence_is_constant() {
        let m = GaussianMixtureModel::standard(1);
        assert!((m.score_divergence(&[1.7]) + 1.0).abs() < 1e-14);
        let m3 = GaussianMixtureModel::standard(3);
        assert!((m3.score_divergence(&[0.3, -0.2, 1.1]) + 3.0).abs() < 1e-13);
        let wide = GaussianMixtureModel::single(vec![0.0], 4.0).unwrap();
        assert!((wide.score_divergence(&[-2.0]) + 0.25).abs() < 1e-14);
    }

    // Independent finite-difference oracles for score and its divergence.
    fn fd_score(m: &GaussianMixtureModel, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|d| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[d] += h;
                xm[d] -= h;
                (m.log_density(&xp) - m.log_density(&xm)) / (2.0 * h)
            })
            .collect()
    }

    fn fd_score_div(m: &GaussianMixtureModel, x: &[f64], h: f64) -> f64 {
        (0..x.len())
            .map(|d| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[d] += h;
                xm[d] -= h;
                (m.score(&xp)[d] - m.score(&xm)[d]) / (2.0 * h)
            })
            .sum()
    }

    #[test]
    fn score_matches_finite_differences() {
        let m = GaussianMixtureModel::new(vec![
            GaussianComponent {
                mean: vec![0.0, 1.0],
                var: 0.7,
                log_weight: 0.3f64.ln(),
            },
            GaussianComponent {
                mean: vec![2.0, -1.0],
                var: 1.5,
                log_weight: 0.7f64.ln(),
            },
        ])
        .unwrap();
        let mut rng = RngStream::per_particle(9, StreamPurpose::Init, 0, 0).rng();
        for _ in 0..100 {
            let x = standard_normal_vec(&mut rng, 2)
                .iter()
                .map(|z| 2.0 * z)
                .collect::<Vec<_>>();
            let exact = m.score(&x);
            let fd = fd_score(&m, &x, 1e-4);
            for (a, b) in exact.iter().zip(&fd) {
                assert!((a - b).abs() < 1e-6, "score mismatch at {x:?}");
            }
            let div_fd = fd_score_div(&m, &x, 1e-4);
            assert!(
                (m.score_divergence(&x) - div_fd).abs() < 1e-5,
                "divergence mismatch at {x:?}"
            );
        }
    }

    #[test]
    fn scalar_eval_matches_vector_path() {
        let m = fixture();
        for i in 0..80 {
            let x = -6.0 + 0.15 * i as f64;
            let (ld, s, d) = m.eval_1d(x);
            assert!((ld - m.log_density(&[x])).abs() < 1e-13);
            assert!((s - m.score(&[x])[0]).abs() < 1e-13);
            assert!((d - m.score_divergence(&[x])).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_semigroup_property() {
        let sched = DiffusionSchedule::Vp {
            beta_min: 0.1,
            beta_max: 20.0,
        };
        let m = fixture();
        // Noising to time t equals noising to s, then continuing from s to t
        // with the remaining contraction/bridge.
        let (s, t) = (0.3, 0.8);
        let direct = m.ou_forward_marginal(t, &sched);
        let stage = m.ou_forward_marginal(s, &sched);
        let alpha_rest = (sched.log_alpha(t) - sched.log_alpha(s)).exp();
        let bridge_rest = sched.bridge_var(t) - alpha_rest * alpha_rest * sched.bridge_var(s);
        for (a, b) in direct.components().iter().zip(stage.components()) {
            let mean2: Vec<f64> = b.mean.iter().map(|m| alpha_rest * m).collect();
            let var2 = alpha_rest * alpha_rest * b.var + bridge_rest;
            for (x, y) in a.mean.iter().zip(&mean2) {
                assert!((x - y).abs() < 1e-10);
            }
            assert!((a.var - var2).abs() < 1e-10);
        }
    }

    #[test]
    fn marginal_identity_at_t0_and_hand_case() {
        let sched = DiffusionSchedule::ConstOu {
            rate: 0.5,
            stationary_var: 1.0,
        };
        let m = GaussianMixtureModel::single(vec![2.0], 1.0).unwrap();
        let at0 = m.ou_forward_marginal(0.0, &sched);
        assert_eq!(at0.components()[0], m.components()[0]);

        // alpha = 0.5 at t = ln(2)/rate: N(2,1) -> N(1, 0.25 + 0.75) = N(1,1).
        let t = 2.0 * 2f64.ln();
        let noised = m.ou_forward_marginal(t, &sched);
        assert!((noised.components()[0].mean[0] - 1.0).abs() < 1e-12);
        assert!((noised.components()[0].var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginal_forgets_input_in_long_time_limit() {
        let sched = DiffusionSchedule::ConstOu {
            rate: 1.0,
            stationary_var: 1.0,
        };
        let m = GaussianMixtureModel::mixture_1d(&[(-3.0, 0.2, 0.3), (5.0, 2.0, 0.7)]).unwrap();
        let far = m.ou_forward_marginal(60.0, &sched);
        for c in far.components() {
            assert!(c.mean[0].abs() < 1e-20);
            assert!((c.var - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let m = fixture();
        // Simpson quadrature over a wide bracket.
        let (lo, hi, n) = (-12.0f64, 16.0f64, 20_000usize);
        let h = (hi - lo) / n as f64;
        let mut s = m.density(&[lo]) + m.density(&[hi]);
        for i in 1..n {
            let x = lo + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * m.density(&[x]);
        }
        let mass = s * h / 3.0;
        assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
    }

    #[test]
    fn weights_are_normalized_on_construction() {
        let m = GaussianMixtureModel::mixture_1d(&[(0.0, 1.0, 2.0), (1.0, 1.0, 6.0)]).unwrap();
        let total: f64 = m.components().iter().map(|c| c.log_weight.exp()).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!((m.components()[1].log_weight.exp() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn double_well_drift_values() {
        let tgt = DoubleWellTarget::new(1.0, 1.0).unwrap();
        assert_eq!(langevin_drift(&tgt, 0.0), 0.0);
        assert_eq!(langevin_drift(&tgt, 1.0), 0.0);
        assert!((langevin_drift(&tgt, 2.0) + 24.0).abs() < 1e-12);
        // V >= 0 with minima exactly at +/- m.
        assert_eq!(tgt.potential(1.0), 0.0);
        assert!(tgt.potential(0.3) > 0.0);
    }

    #[test]
    fn sampling_matches_moments() {
        let m = fixture();
        let mut rng = RngStream::per_particle(11, StreamPurpose::ModelDraw, 0, 0).rng();
        let n = 200_000;
        let mut mean = 0.0;
        for _ in 0..n {
            mean += m.sample(&mut rng)[0];
        }
        mean /= n as f64;
        // True mean 2.0; sd of estimate ~ sqrt((1 + 4)/n) ~ 0.005.
        assert!((mean - 2.0).abs() < 0.03, "mean = {mean}");
    }
}
