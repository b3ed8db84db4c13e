//! Declarative experiment description. One JSON file defines a run; every
//! field is validated with a field-level message before any computation.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::correctors::InterpolationSpec;
use crate::error::{Error, Result};
use crate::fields::FieldSet;
use crate::models::{GaussianComponent, GaussianMixtureModel};
use crate::reaction::ResampleScheme;
use crate::schedule::{DiffusionSchedule, TimeSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Sample,
    Oracle,
    JumpEquivalence,
    Geodesic,
    Diagnostics,
}

/// How the reaction term is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReactionMode {
    /// Accumulate log-weights, resample per the scheme.
    #[default]
    Weight,
    /// Birth/death jumps every step; weights stay flat.
    Jump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub mean: Vec<f64>,
    pub var: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    #[serde(default = "default_t_start")]
    pub t_start: f64,
    #[serde(default)]
    pub t_end: f64,
    pub n_steps: usize,
    pub diffusion: DiffusionSchedule,
}

fn default_t_start() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub model1: Vec<ComponentSpec>,
    pub model2: Vec<ComponentSpec>,
    pub interpolation: InterpolationSpec,
    pub schedule: ScheduleConfig,
    pub particles: usize,
    #[serde(default)]
    pub resample: ResampleScheme,
    #[serde(default)]
    pub reaction_mode: ReactionMode,
    pub seed: u64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::config("<root>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let model_spec = |name: &str, comps: &[ComponentSpec]| -> Result<()> {
            if comps.is_empty() {
                return Err(Error::config(name, "needs at least one component"));
            }
            for (i, c) in comps.iter().enumerate() {
                if c.mean.is_empty() {
                    return Err(Error::config(
                        format!("{name}[{i}].mean"),
                        "must be non-empty",
                    ));
                }
                if !(c.var > 0.0) {
                    return Err(Error::config(format!("{name}[{i}].var"), "must be > 0"));
                }
                if !(c.weight > 0.0) {
                    return Err(Error::config(format!("{name}[{i}].weight"), "must be > 0"));
                }
            }
            Ok(())
        };
        model_spec("model1", &self.model1)?;
        model_spec("model2", &self.model2)?;
        let d1 = self.model1[0].mean.len();
        if self.model2.iter().any(|c| c.mean.len() != d1)
            || self.model1.iter().any(|c| c.mean.len() != d1)
        {
            return Err(Error::config("model2", "dimension differs from model1"));
        }
        self.interpolation
            .validate()
            .map_err(|e| Error::config("interpolation", e.to_string()))?;
        if self.schedule.n_steps == 0 {
            return Err(Error::config("schedule.n_steps", "must be >= 1"));
        }
        if self.schedule.t_start == self.schedule.t_end {
            return Err(Error::config("schedule", "t_start must differ from t_end"));
        }
        self.schedule
            .diffusion
            .validate()
            .map_err(|e| Error::config("schedule.diffusion", e.to_string()))?;
        if self.particles == 0 {
            return Err(Error::config("particles", "must be >= 1"));
        }
        self.resample
            .validate()
            .map_err(|e| Error::config("resample", e.to_string()))?;
        let (a, b) = (self.schedule.t_start, self.schedule.t_end);
        let (lo, hi) = (a.min(b), a.max(b));
        for (i, &t) in self.snapshots.iter().enumerate() {
            if !(lo..=hi).contains(&t) {
                return Err(Error::config(
                    format!("snapshots[{i}]"),
                    format!("{t} outside schedule range [{lo}, {hi}]"),
                ));
            }
        }
        Ok(())
    }

    fn build_model(comps: &[ComponentSpec]) -> Result<GaussianMixtureModel> {
        GaussianMixtureModel::new(
            comps
                .iter()
                .map(|c| GaussianComponent {
                    mean: c.mean.clone(),
                    var: c.var,
                    log_weight: c.weight.ln(),
                })
                .collect(),
        )
    }

    pub fn model1(&self) -> Result<GaussianMixtureModel> {
        Self::build_model(&self.model1)
    }

    pub fn model2(&self) -> Result<GaussianMixtureModel> {
        Self::build_model(&self.model2)
    }

    pub fn field_set(&self) -> Result<FieldSet> {
        Ok(FieldSet::noised(
            self.model1()?,
            self.model2()?,
            self.schedule.diffusion,
        ))
    }

    pub fn time_schedule(&self) -> Result<TimeSchedule> {
        TimeSchedule::new(
            self.schedule.t_start,
            self.schedule.t_end,
            self.schedule.n_steps,
        )
    }
}
