//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wellopt_core::{MultiscaleConfig, SolverConfig};
use wellopt_reservoir::{build_model1, build_model1_desk, SimOptions, WaterfloodCase};

use crate::error::{HarnessError, Result};
use crate::runs::Processors;

/// Evaluation budget per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    Absolute(usize),
    /// Multiple of the number of control variables at the final resolution.
    PerVariable(usize),
}

impl Default for Budget {
    fn default() -> Self {
        Self::PerVariable(100)
    }
}

impl Budget {
    pub fn resolve(&self, variables: usize) -> usize {
        match *self {
            Self::Absolute(n) => n,
            Self::PerVariable(k) => k * variables,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Label used in aggregate and beanplot tables; derived when empty.
    #[serde(default)]
    pub label: String,
    /// `model1`, `model1-desk`, or a path to a model JSON file (relative
    /// paths are resolved against the config file's directory).
    pub model: String,
    #[serde(default)]
    pub sim: SimOptions,
    pub solver: SolverConfig,
    /// Refine successively up to `max_steps`; exclusive with `steps_per_well`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiscale: Option<MultiscaleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_well: Option<usize>,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed_base")]
    pub seed_base: u64,
    /// Machines for which run counts are exported.
    #[serde(default = "default_processors")]
    pub processors: Vec<Processors>,
    /// Start rates per controlled well; the model's initial rates if unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_rates: Option<Vec<f64>>,
    /// Size of the evaluation pool; does not affect results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Does not affect results.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_trials() -> usize {
    10
}

fn default_seed_base() -> u64 {
    1
}

fn default_processors() -> Vec<Processors> {
    vec![Processors::Finite(1), Processors::Finite(8), Processors::Finite(32), Processors::Unlimited]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn new(model: &str, solver: SolverConfig) -> Self {
        Self {
            label: String::new(),
            model: model.into(),
            sim: SimOptions::default(),
            solver,
            multiscale: None,
            steps_per_well: None,
            budget: Budget::default(),
            trials: default_trials(),
            seed_base: default_seed_base(),
            processors: default_processors(),
            initial_rates: None,
            workers: None,
            output_dir: default_output_dir(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let cfg = Self::from_json(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Config(m.into()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        match (&self.multiscale, self.steps_per_well) {
            (Some(m), None) => m.validate().map_err(|e| HarnessError::Config(e.to_string()))?,
            (None, Some(n)) if n > 0 => {}
            (None, Some(_)) => return bad("steps_per_well must be at least 1"),
            _ => return bad("set exactly one of 'multiscale' and 'steps_per_well'"),
        }
        if self.budget.resolve(1) == 0 {
            return bad("budget must be positive");
        }
        if self.processors.is_empty() {
            return bad("list at least one processor count");
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1");
        }
        if self.model.trim().is_empty() {
            return bad("model must name a built-in model or a file");
        }
        Ok(())
    }

    /// Trials actually run: deterministic solvers run once.
    pub fn effective_trials(&self) -> usize {
        if self.solver.is_deterministic() {
            1
        } else {
            self.trials
        }
    }

    /// Control steps per well at the first optimization scale.
    pub fn start_steps(&self) -> usize {
        match (&self.multiscale, self.steps_per_well) {
            (Some(m), _) => m.n0,
            (None, Some(n)) => n,
            (None, None) => 1,
        }
    }

    pub fn final_steps(&self) -> usize {
        match (&self.multiscale, self.steps_per_well) {
            (Some(m), _) => m.max_steps,
            (None, Some(n)) => n,
            (None, None) => 1,
        }
    }

    pub fn display_label(&self) -> String {
        if !self.label.is_empty() {
            return self.label.clone();
        }
        match &self.multiscale {
            Some(m) => {
                let preset = ["I", "II", "III", "IV"]
                    .into_iter()
                    .find(|l| MultiscaleConfig::named(l, m.max_steps).as_ref() == Some(m));
                match preset {
                    Some(p) => format!("M-{}-{p}", self.solver.name()),
                    None => format!("M-{}-{}x{}", self.solver.name(), m.n0, m.ns),
                }
            }
            None => format!("{}-{}", self.solver.name(), self.final_steps()),
        }
    }

    pub fn load_case(&self, base_dir: &Path) -> Result<WaterfloodCase> {
        match self.model.as_str() {
            "model1" => Ok(build_model1()),
            "model1-desk" => Ok(build_model1_desk()),
            path => Ok(WaterfloodCase::load(&base_dir.join(path))?),
        }
    }

    /// SHA-256 of the canonical JSON form without the fields that cannot
    /// change results (`output_dir`, `workers`).
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
            map.remove("workers");
        }
        let canonical = serde_json::to_string(&value).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
