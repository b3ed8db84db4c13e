//! Time-indexed field bundle: drift, diffusion strength, and the two models'
//! scores and score divergences, everything the integrator and the PDE oracle
//! query per step.

use crate::correctors::{interp_eval, GuidedEvaluation, InterpolationSpec};
use crate::error::Result;
use crate::models::GaussianMixtureModel;
use crate::schedule::DiffusionSchedule;

/// Pair of models plus the noising schedule that generates their time-t
/// marginals. The `Frozen` variant pins the models at their data-time form
/// with a constant sigma; it exists for integrator and corrector checks where
/// the analytic time dependence would get in the way.
#[derive(Debug, Clone)]
pub enum FieldSet {
    Noised {
        model1: GaussianMixtureModel,
        model2: GaussianMixtureModel,
        schedule: DiffusionSchedule,
    },
    Frozen {
        model1: GaussianMixtureModel,
        model2: GaussianMixtureModel,
        sigma: f64,
    },
}

impl FieldSet {
    pub fn noised(
        model1: GaussianMixtureModel,
        model2: GaussianMixtureModel,
        schedule: DiffusionSchedule,
    ) -> Self {
        assert_eq!(model1.dim(), model2.dim(), "models must share a dimension");
        FieldSet::Noised {
            model1,
            model2,
            schedule,
        }
    }

    pub fn frozen(model1: GaussianMixtureModel, model2: GaussianMixtureModel, sigma: f64) -> Self {
        assert_eq!(model1.dim(), model2.dim(), "models must share a dimension");
        FieldSet::Frozen {
            model1,
            model2,
            sigma,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FieldSet::Noised { model1, .. } | FieldSet::Frozen { model1, .. } => model1.dim(),
        }
    }

    pub fn schedule(&self) -> Option<&DiffusionSchedule> {
        match self {
            FieldSet::Noised { schedule, .. } => Some(schedule),
            FieldSet::Frozen { .. } => None,
        }
    }

    /// Materialize the exact time-t marginals and scalar coefficients.
    pub fn at(&self, t: f64) -> FieldsAt {
        match self {
            FieldSet::Noised {
                model1,
                model2,
                schedule,
            } => FieldsAt {
                t,
                sigma: schedule.sigma(t),
                kappa: schedule.kappa(t),
                m1: model1.ou_forward_marginal(t, schedule),
                m2: model2.ou_forward_marginal(t, schedule),
            },
            FieldSet::Frozen {
                model1,
                model2,
                sigma,
            } => FieldsAt {
                t,
                sigma: *sigma,
                kappa: 0.0,
                m1: model1.clone(),
                m2: model2.clone(),
            },
        }
    }
}

/// Everything evaluated at one time slice.
#[derive(Debug, Clone)]
pub struct FieldsAt {
    pub t: f64,
    pub sigma: f64,
    pub kappa: f64,
    m1: GaussianMixtureModel,
    m2: GaussianMixtureModel,
}

impl FieldsAt {
    pub fn model1(&self) -> &GaussianMixtureModel {
        &self.m1
    }

    pub fn model2(&self) -> &GaussianMixtureModel {
        &self.m2
    }

    /// Forward-noising drift f_t(x) = -kappa_t x.
    pub fn drift_base(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&xi| -self.kappa * xi).collect()
    }

    pub fn score1(&self, x: &[f64]) -> Vec<f64> {
        self.m1.score(x)
    }

    pub fn score2(&self, x: &[f64]) -> Vec<f64> {
        self.m2.score(x)
    }

    pub fn score_div1(&self, x: &[f64]) -> f64 {
        self.m1.score_divergence(x)
    }

    pub fn score_div2(&self, x: &[f64]) -> f64 {
        self.m2.score_divergence(x)
    }

    /// Exact log-density ratio log(q2_t / q1_t); the oracle-side ground truth
    /// the per-particle tracked ell approximates.
    pub fn exact_ell(&self, x: &[f64]) -> f64 {
        self.m2.log_density(x) - self.m1.log_density(x)
    }

    /// Reverse-time guided drift v = -f_t + sigma_t^2 s for a given score.
    pub fn guided_velocity(&self, x: &[f64], guided_score: &[f64]) -> Vec<f64> {
        let s2 = self.sigma * self.sigma;
        x.iter()
            .zip(guided_score)
            .map(|(&xi, &si)| self.kappa * xi + s2 * si)
            .collect()
    }

    /// Corrector evaluation at (x, ell) for the given interpolation.
    pub fn guided(&self, interp: &InterpolationSpec, x: &[f64], ell: f64) -> Result<GuidedEvaluation> {
        let s1 = self.score1(x);
        let s2 = self.score2(x);
        interp_eval(interp, &s1, &s2, ell, self.sigma)
    }
}
