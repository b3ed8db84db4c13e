//! Time grids and noising schedules.
//!
//! Time lives on [0, 1] with the data law at t = 0 and the reference noise law
//! at t = 1. The forward noising process (never simulated, only used through
//! its closed-form marginals) is
//!
//!   dX = -kappa_t X dt + sigma_t dW,    t: 0 -> 1,
//!
//! so a component mean contracts by alpha_t = exp(-int_0^t kappa) and an
//! isotropic variance maps to alpha_t^2 v + bridge_var(t). Samplers integrate
//! the reverse-time SDE from t = 1 down to t = 0 with drift
//! kappa_t x + sigma_t^2 s(x), which is `-drift_base + sigma^2 s` for the
//! noising drift `drift_base = -kappa_t x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Reverse,
}

/// Uniform time grid between `t_start` and `t_end` with `n_steps` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSchedule {
    pub t_start: f64,
    pub t_end: f64,
    pub n_steps: usize,
    pub direction: Direction,
}

impl TimeSchedule {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::invalid("n_steps must be >= 1"));
        }
        if !(t_start.is_finite() && t_end.is_finite()) || t_start == t_end {
            return Err(Error::invalid(format!(
                "degenerate time interval [{t_start}, {t_end}]"
            )));
        }
        let direction = if t_end > t_start {
            Direction::Forward
        } else {
            Direction::Reverse
        };
        Ok(Self {
            t_start,
            t_end,
            n_steps,
            direction,
        })
    }

    /// Standard sampling grid: t = 1 down to t = 0.
    pub fn reverse_unit(n_steps: usize) -> Result<Self> {
        Self::new(1.0, 0.0, n_steps)
    }

    /// Unsigned step size h > 0.
    pub fn step_size(&self) -> f64 {
        (self.t_end - self.t_start).abs() / self.n_steps as f64
    }

    /// Signed step (negative for reverse schedules).
    pub fn signed_step(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps as f64
    }

    /// Grid point after `k` steps; `time_at(n_steps)` lands exactly on `t_end`.
    pub fn time_at(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            self.t_start + self.signed_step() * k as f64
        }
    }

    /// All n_steps + 1 grid points in schedule order.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(move |k| self.time_at(k))
    }
}

/// Noising family: the diffusion strength sigma_t and the linear contraction
/// rate kappa_t, both with closed-form integrals so that time-t marginals of
/// Gaussian mixtures stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DiffusionSchedule {
    /// Variance-preserving: rate beta(t) = beta_min + t (beta_max - beta_min),
    /// kappa = beta/2, sigma^2 = beta, stationary variance 1.
    Vp { beta_min: f64, beta_max: f64 },
    /// Constant-rate contraction toward N(0, stationary_var);
    /// sigma^2 = 2 rate stationary_var.
    ConstOu { rate: f64, stationary_var: f64 },
    /// Pure Brownian noising: kappa = 0, constant sigma.
    Heat { sigma: f64 },
    /// No drift, no noise. Marginals frozen; useful as a null schedule.
    Static,
}

impl DiffusionSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DiffusionSchedule::Vp { beta_min, beta_max } => {
                if !(beta_min > 0.0 && beta_max >= beta_min) {
                    return Err(Error::invalid(
                        "vp schedule needs 0 < beta_min <= beta_max",
                    ));
                }
            }
            DiffusionSchedule::ConstOu {
                rate,
                stationary_var,
            } => {
                if !(rate > 0.0 && stationary_var > 0.0) {
                    return Err(Error::invalid(
                        "const_ou schedule needs rate > 0 and stationary_var > 0",
                    ));
                }
            }
            DiffusionSchedule::Heat { sigma } => {
                if !(sigma >= 0.0) {
                    return Err(Error::invalid("heat schedule needs sigma >= 0"));
                }
            }
            DiffusionSchedule::Static => {}
        }
        Ok(())
    }

    /// Contraction rate kappa_t >= 0.
    pub fn kappa(&self, t: f64) -> f64 {
        match *self {
            DiffusionSchedule::Vp { beta_min, beta_max } => {
                0.5 * (beta_min + t * (beta_max - beta_min))
            }
            DiffusionSchedule::ConstOu { rate, .. } => rate,
            DiffusionSchedule::Heat { .. } | DiffusionSchedule::Static => 0.0,
        }
    }

    /// Diffusion strength sigma_t >= 0.
    pub fn sigma(&self, t: f64) -> f64 {
        match *self {
            DiffusionSchedule::Vp { beta_min, beta_max } => {
                (beta_min + t * (beta_max - beta_min)).sqrt()
            }
            DiffusionSchedule::ConstOu {
                rate,
                stationary_var,
            } => (2.0 * rate * stationary_var).sqrt(),
            DiffusionSchedule::Heat { sigma } => sigma,
            DiffusionSchedule::Static => 0.0,
        }
    }

    /// log alpha_t = -int_0^t kappa_s ds, in closed form per family.
    pub fn log_alpha(&self, t: f64) -> f64 {
        match *self {
            DiffusionSchedule::Vp { beta_min, beta_max } => {
                -0.5 * (beta_min * t + 0.5 * (beta_max - beta_min) * t * t)
            }
            DiffusionSchedule::ConstOu { rate, .. } => -rate * t,
            DiffusionSchedule::Heat { .. } | DiffusionSchedule::Static => 0.0,
        }
    }

    /// Accumulated noise variance: time-t variance of a component that started
    /// as a point mass, i.e. Var_t = alpha_t^2 v_0 + bridge_var(t).
    pub fn bridge_var(&self, t: f64) -> f64 {
        match *self {
            DiffusionSchedule::Vp { .. } => {
                let a2 = (2.0 * self.log_alpha(t)).exp();
                1.0 - a2
            }
            DiffusionSchedule::ConstOu { stationary_var, .. } => {
                let a2 = (2.0 * self.log_alpha(t)).exp();
                stationary_var * (1.0 - a2)
            }
            DiffusionSchedule::Heat { sigma } => sigma * sigma * t,
            DiffusionSchedule::Static => 0.0,
        }
    }

    /// Variance of the t -> infinity noise law, when one exists. Used to seed
    /// reverse-time runs from the reference law.
    pub fn stationary_var(&self) -> Option<f64> {
        match *self {
            DiffusionSchedule::Vp { .. } => Some(1.0),
            DiffusionSchedule::ConstOu { stationary_var, .. } => Some(stationary_var),
            DiffusionSchedule::Heat { .. } | DiffusionSchedule::Static => None,
        }
    }

    /// Forward-noising drift f_t(x) = -kappa_t x.
    pub fn drift_base(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let k = self.kappa(t);
        x.iter().map(|&xi| -k * xi).collect()
    }
}
