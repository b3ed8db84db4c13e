//! Packaged verification routines shared by the CLI `diagnose` subcommand and
//! the acceptance suite: adjoint-identity residuals, grid curvature checks,
//! Monte Carlo variance decay, and the chi-square dissipation cases.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::grid::GridDensity;
use crate::models::GaussianMixtureModel;
use crate::oracle::{
    chi2_dissipation_residual, gamma2_operator, gamma_operator, DiscreteGenerator,
};
use crate::reaction::discrete_adjoint_check;
use crate::rng::{standard_normal, RngStream, StreamPurpose};

/// Worst adjoint residual over `trials` random (p, psi) instances on
/// `states` states.
pub fn adjoint_residual_max(states: usize, trials: usize, seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let mut rng = RngStream::per_particle(seed, StreamPurpose::ModelDraw, trial as u64, 0).rng();
        let raw: Vec<f64> = (0..states).map(|_| rng.random::<f64>() + 0.05).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let psi: Vec<f64> = (0..states).map(|_| 3.0 * standard_normal(&mut rng)).collect();
        worst = worst.max(discrete_adjoint_check(&p, &psi)?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaReport {
    pub cells: usize,
    pub dx: f64,
    /// max |Gamma(x) - 1| over interior cells for the OU(1) generator.
    pub max_gamma_err: f64,
    /// max |Gamma2(x) - 1| over interior cells.
    pub max_gamma2_err: f64,
}

/// Bakry-Emery equality case on the grid: OU with rate 1 and f(x) = x has
/// Gamma(f) = Gamma2(f) = 1.
pub fn gamma_ou_check(cells: usize) -> GammaReport {
    let gen = DiscreteGenerator::ou(1.0, -4.0, 4.0, cells);
    let f = gen.centers();
    let g1 = gamma_operator(&f, &f, &gen);
    let g2 = gamma2_operator(&f, &gen);
    let margin = 3;
    let mut e1 = 0.0f64;
    let mut e2 = 0.0f64;
    for i in margin..cells - margin {
        e1 = e1.max((g1[i] - 1.0).abs());
        e2 = e2.max((g2[i] - 1.0).abs());
    }
    GammaReport {
        cells,
        dx: gen.dx(),
        max_gamma_err: e1,
        max_gamma2_err: e2,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceDecayPoint {
    pub t: f64,
    pub ratio: f64,
    pub expected: f64,
    pub rel_err: f64,
}

/// Monte Carlo check of Var_pi(P_t f) / Var_pi(f) = e^{-2 alpha t} for
/// f(x) = x under the OU process dX = -alpha X dt + sqrt(2) dW with
/// pi = N(0, 1/alpha).
///
/// Var_pi(P_t f) is estimated with conditionally independent trajectory pairs
/// from a shared pi-distributed start: E[X_t X'_t | X_0 = x] = (P_t f)(x)^2.
pub fn ou_variance_decay_mc(alpha: f64, t: f64, k: usize, h: f64, seed: u64) -> VarianceDecayPoint {
    let n_steps = (t / h).round() as usize;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..k {
        let mut rng = RngStream::per_particle(seed, StreamPurpose::Init, 0, i as u64).rng();
        let x0 = standard_normal(&mut rng) / alpha.sqrt();
        let mut xa = x0;
        let mut xb = x0;
        let mut rng_a =
            RngStream::per_particle(seed, StreamPurpose::Langevin, 0, 2 * i as u64).rng();
        let mut rng_b =
            RngStream::per_particle(seed, StreamPurpose::Langevin, 0, 2 * i as u64 + 1).rng();
        let noise = (2.0 * h).sqrt();
        for _ in 0..n_steps {
            xa += -alpha * xa * h + noise * standard_normal(&mut rng_a);
            xb += -alpha * xb * h + noise * standard_normal(&mut rng_b);
        }
        num += xa * xb;
        den += x0 * x0;
    }
    let ratio = num / den;
    let expected = (-2.0 * alpha * t).exp();
    VarianceDecayPoint {
        t,
        ratio,
        expected,
        rel_err: (ratio - expected).abs() / expected,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Chi2Case {
    pub name: String,
    pub residual: f64,
}

/// The three dissipation-identity cases: equilibrium, pure diffusion from a
/// perturbed start, and a frozen quadratic potential.
pub fn chi2_cases(cells: usize, dt: f64) -> Result<Vec<Chi2Case>> {
    let pi = GridDensity::from_model(&GaussianMixtureModel::standard(1), -8.0, 8.0, cells)?;
    let sqrt2 = 2f64.sqrt();
    let flat = GridDensity::new(-8.0, 8.0, vec![1.0; cells])?;
    let mut out = vec![Chi2Case {
        name: "equilibrium".into(),
        residual: chi2_dissipation_residual(&flat, |_| 0.0, &pi, sqrt2, dt)?,
    }];

    // rho = 1 + 0.1 x e^{-x^2}: mean-zero perturbation, g = 0.
    let perturbed = GridDensity::new(
        -8.0,
        8.0,
        pi.centers()
            .iter()
            .map(|&x| 1.0 + 0.1 * x * (-x * x).exp())
            .collect(),
    )?;
    out.push(Chi2Case {
        name: "pure_diffusion".into(),
        residual: chi2_dissipation_residual(&perturbed, |_| 0.0, &pi, sqrt2, dt)?,
    });
    out.push(Chi2Case {
        name: "quadratic_potential".into(),
        residual: chi2_dissipation_residual(&perturbed, |x| -x * x, &pi, sqrt2, dt)?,
    });
    Ok(out)
}
