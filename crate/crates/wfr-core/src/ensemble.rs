//! The weighted particle system.
//!
//! Log-weights are stored and combined in log space for the whole run; the
//! normalized weights are only materialized through a max-subtracted softmax.
//! Dead particles (non-finite state after a step) stay in their slots with
//! zero weight until the next resampling barrier removes them, so the
//! population size K is constant.

use crate::error::{Error, Result};
use crate::numerics::logsumexp;
use crate::rng::{standard_normal_vec, RngStream, StreamPurpose};

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    /// Position in R^d.
    pub x: Vec<f64>,
    /// Accumulated Feynman-Kac log-weight (uncentered).
    pub log_w: f64,
    /// Tracked log-density ratio ell = log(q2/q1) along the trajectory.
    pub ell: f64,
    pub alive: bool,
}

impl Particle {
    pub fn at(x: Vec<f64>) -> Self {
        Self {
            x,
            log_w: 0.0,
            ell: 0.0,
            alive: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub particles: Vec<Particle>,
    pub dim: usize,
    /// Current time t of the ensemble.
    pub time: f64,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn n_alive(&self) -> usize {
        self.particles.iter().filter(|p| p.alive).count()
    }

    /// Positions of alive particles (first coordinate), for 1-D diagnostics.
    pub fn alive_x1(&self) -> Vec<f64> {
        self.particles
            .iter()
            .filter(|p| p.alive)
            .map(|p| p.x[0])
            .collect()
    }
}

/// Build a K-particle ensemble at time `t0`. Each particle's position comes
/// from `init_sampler` on its own stream, so the result does not depend on
/// evaluation order.
pub fn make_ensemble<F>(k: usize, init_sampler: F, seed: u64, t0: f64) -> Result<Ensemble>
where
    F: Fn(RngStream) -> Vec<f64>,
{
    if k == 0 {
        return Err(Error::invalid("particle count k must be >= 1"));
    }
    let particles: Vec<Particle> = (0..k)
        .map(|i| {
            let stream = RngStream::per_particle(seed, StreamPurpose::Init, 0, i as u64);
            Particle::at(init_sampler(stream))
        })
        .collect();
    let dim = particles[0].x.len();
    if dim == 0 {
        return Err(Error::invalid("init_sampler produced an empty position"));
    }
    if particles.iter().any(|p| p.x.len() != dim) {
        return Err(Error::invalid("init_sampler produced mixed dimensions"));
    }
    Ok(Ensemble {
        particles,
        dim,
        time: t0,
    })
}

/// Isotropic Gaussian initializer N(0, var I) in `dim` dimensions.
pub fn gaussian_init(dim: usize, var: f64) -> impl Fn(RngStream) -> Vec<f64> {
    let sd = var.sqrt();
    move |stream: RngStream| {
        let mut rng = stream.rng();
        standard_normal_vec(&mut rng, dim)
            .into_iter()
            .map(|z| sd * z)
            .collect()
    }
}

/// Softmax of the log-weights over alive particles. Dead slots get weight 0.
/// The result sums to 1 up to rounding.
pub fn normalized_weights(e: &Ensemble) -> Result<Vec<f64>> {
    let logs: Vec<f64> = e
        .particles
        .iter()
        .map(|p| if p.alive { p.log_w } else { f64::NEG_INFINITY })
        .collect();
    let z = logsumexp(&logs);
    if !z.is_finite() {
        return Err(Error::DegenerateEnsemble(
            "no alive particle carries positive weight".into(),
        ));
    }
    Ok(logs.iter().map(|&lw| (lw - z).exp()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_empty_ensemble() {
        assert!(make_ensemble(0, |_| vec![0.0], 1, 1.0).is_err());
    }

    #[test]
    fn single_particle_at_origin() {
        let e = make_ensemble(1, |_| vec![0.0], 1, 1.0).unwrap();
        assert_eq!(e.particles[0].x, vec![0.0]);
        assert_eq!(e.particles[0].log_w, 0.0);
        assert_eq!(e.particles[0].ell, 0.0);
        assert_eq!(e.time, 1.0);
    }

    #[test]
    fn gaussian_init_mean_within_clt_bound() {
        // K = 1000 standard normal draws: |mean| <= 4 / sqrt(1000) per
        // coordinate with overwhelming probability (4-sigma bound).
        let k = 1000;
        let e = make_ensemble(k, gaussian_init(2, 1.0), 42, 1.0).unwrap();
        for d in 0..2 {
            let mean: f64 = e.particles.iter().map(|p| p.x[d]).sum::<f64>() / k as f64;
            assert!(mean.abs() < 4.0 / (k as f64).sqrt(), "coord {d}: {mean}");
        }
    }

    #[test]
    fn same_seed_bit_identical() {
        let a = make_ensemble(1000, gaussian_init(3, 2.0), 42, 1.0).unwrap();
        let b = make_ensemble(1000, gaussian_init(3, 2.0), 42, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_weights() {
        let mut e = make_ensemble(4, |_| vec![0.0], 7, 0.0).unwrap();
        let w = normalized_weights(&e).unwrap();
        assert_eq!(w, vec![0.25; 4]);
        // Dead particles get zero weight and the rest renormalizes.
        e.particles[0].alive = false;
        let w = normalized_weights(&e).unwrap();
        assert_eq!(w[0], 0.0);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_of_zero_and_ln3() {
        let mut e = make_ensemble(2, |_| vec![0.0], 7, 0.0).unwrap();
        e.particles[1].log_w = 3f64.ln();
        let w = normalized_weights(&e).unwrap();
        assert!((w[0] - 0.25).abs() < 1e-15);
        assert!((w[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn softmax_survives_large_logs() {
        let mut e = make_ensemble(2, |_| vec![0.0], 7, 0.0).unwrap();
        e.particles[0].log_w = 1000.0;
        e.particles[1].log_w = 1000.0;
        let w = normalized_weights(&e).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12);
        assert!((w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn all_dead_is_degenerate() {
        let mut e = make_ensemble(3, |_| vec![0.0], 7, 0.0).unwrap();
        for p in &mut e.particles {
            p.alive = false;
        }
        assert!(matches!(
            normalized_weights(&e),
            Err(Error::DegenerateEnsemble(_))
        ));
    }

    proptest! {
        // Adding a constant to every log-weight leaves the softmax unchanged.
        #[test]
        fn softmax_shift_invariance(
            logs in proptest::collection::vec(-50.0f64..50.0, 1..20),
            c in -200.0f64..200.0,
        ) {
            let mut e = make_ensemble(logs.len(), |_| vec![0.0], 1, 0.0).unwrap();
            for (p, &lw) in e.particles.iter_mut().zip(&logs) {
                p.log_w = lw;
            }
            let w0 = normalized_weights(&e).unwrap();
            for p in &mut e.particles {
                p.log_w += c;
            }
            let w1 = normalized_weights(&e).unwrap();
            for (a, b) in w0.iter().zip(&w1) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert!((w1.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
