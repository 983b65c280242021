//! Subprocess adapter for an external simulator.
//!
//! For every evaluation a fresh directory receives `schedule.json` (a
//! serialized [`ControlSchedule`]); the program is invoked as
//! `program [args..] <schedule.json> <profile.json>` and must write a
//! [`ProductionProfile`] to the second path and exit with status 0.

use std::path::PathBuf;
use std::process::Command;

use serde::{Deserialize, Serialize};
use wellopt_core::{Bounds, ControlSchedule, EvalError, Objective};

use crate::economics::{npv, EconomicParams, ProductionProfile};
use crate::error::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalSimulator {
    pub program: PathBuf,
    #[serde(default)]
    pub args: Vec<String>,
    /// Parent for the per-evaluation directories; the system temp dir if unset.
    #[serde(default)]
    pub work_dir: Option<PathBuf>,
}

impl ExternalSimulator {
    pub fn run(&self, schedule: &ControlSchedule) -> Result<ProductionProfile> {
        let dir = match &self.work_dir {
            Some(parent) => tempfile::Builder::new().prefix("eval-").tempdir_in(parent)?,
            None => tempfile::Builder::new().prefix("eval-").tempdir()?,
        };
        let schedule_path = dir.path().join("schedule.json");
        let profile_path = dir.path().join("profile.json");
        std::fs::write(&schedule_path, serde_json::to_vec_pretty(schedule)?)?;
        let output = Command::new(&self.program)
            .args(&self.args)
            .arg(&schedule_path)
            .arg(&profile_path)
            .output()?;
        if !output.status.success() {
            return Err(SimError::External(format!(
                "{} exited with {}: {}",
                self.program.display(),
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let text = std::fs::read_to_string(&profile_path)
            .map_err(|e| SimError::External(format!("no profile written: {e}")))?;
        let profile: ProductionProfile = serde_json::from_str(&text)?;
        let horizon = schedule.horizon();
        if profile.steps.len() != schedule.steps_per_well() || (profile.horizon() - horizon).abs() > 1e-9 * horizon {
            return Err(SimError::External(format!(
                "profile has {} steps over {} days, expected {} over {horizon}",
                profile.steps.len(),
                profile.horizon(),
                schedule.steps_per_well()
            )));
        }
        Ok(profile)
    }
}

/// NPV objective backed by an external simulator.
pub struct ExternalObjective {
    pub simulator: ExternalSimulator,
    pub economics: EconomicParams,
    pub bounds: Bounds,
    pub wells: usize,
    pub horizon: f64,
}

impl Objective for ExternalObjective {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, EvalError> {
        let steps = x.len() / self.wells.max(1);
        let schedule = ControlSchedule::new(self.wells, steps, x.to_vec(), self.horizon)
            .map_err(|e| EvalError::new(e.to_string()))?;
        let profile = self
            .simulator
            .run(&schedule)
            .map_err(|e| EvalError::new(e.to_string()))?;
        Ok(npv(&profile, &self.economics))
    }
}
