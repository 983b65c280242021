//! Seeded multi-trial experiment execution.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wellopt_core::log::nan_as_null;
use wellopt_core::{
    run_multiscale, seeded, trial_seed, EvaluationLog, ObjectiveFamily, ScaleResult, Termination,
};
use wellopt_reservoir::{WaterfloodCase, WaterfloodFamily};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::stats::{trial_stats, TrialStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrialStatus {
    Completed,
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub status: TrialStatus,
    #[serde(with = "nan_as_null")]
    pub best_value: f64,
    pub best_schedule: Vec<f64>,
    #[serde(with = "nan_as_null")]
    pub start_value: f64,
    pub steps_per_well: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
    /// Per-scale results of a multiscale run.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scales: Vec<ScaleResult>,
    #[serde(default)]
    pub truncated: bool,
    pub log: EvaluationLog,
}

impl TrialRecord {
    pub fn completed(&self) -> bool {
        self.status == TrialStatus::Completed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub label: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub dimension: usize,
    pub budget: usize,
    pub trials: Vec<TrialRecord>,
}

impl ExperimentReport {
    pub fn completed_bests(&self) -> Vec<f64> {
        self.trials.iter().filter(|t| t.completed()).map(|t| t.best_value).collect()
    }

    /// Statistics over completed trials; `None` when every trial failed.
    pub fn stats(&self) -> Option<TrialStats> {
        trial_stats(&self.completed_bests()).ok()
    }
}

/// Run every trial of `cfg`. Relative model paths resolve against `base_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, base_dir: &Path) -> Result<ExperimentReport> {
    cfg.validate()?;
    let case = cfg.load_case(base_dir)?;
    run_experiment_on(cfg, case)
}

pub fn run_experiment_on(cfg: &ExperimentConfig, case: WaterfloodCase) -> Result<ExperimentReport> {
    cfg.validate()?;
    let family = WaterfloodFamily::new(case, cfg.sim)?;
    let wells = family.wells();
    let start_steps = cfg.start_steps();
    let x0 = initial_guess(cfg, family.case(), start_steps)?;
    let dimension = wells * cfg.final_steps();
    let budget = cfg.budget.resolve(dimension);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Usage(format!("cannot start the evaluation pool: {e}")))?;

    let trials = pool.install(|| {
        (0..cfg.effective_trials())
            .map(|t| run_trial(cfg, &family, &x0, budget, t))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(ExperimentReport {
        label: cfg.display_label(),
        config: cfg.clone(),
        config_hash: cfg.hash(),
        dimension,
        budget,
        trials,
    })
}

fn initial_guess(cfg: &ExperimentConfig, case: &WaterfloodCase, steps: usize) -> Result<Vec<f64>> {
    match &cfg.initial_rates {
        None => Ok(case.initial_schedule(steps)?.into_values()),
        Some(rates) => {
            if rates.len() != case.controlled_count() {
                return Err(HarnessError::Config(format!(
                    "initial_rates has {} entries for {} controlled wells",
                    rates.len(),
                    case.controlled_count()
                )));
            }
            let x0 = wellopt_core::ControlSchedule::constant(rates, steps, case.model.horizon)?.into_values();
            if !case.bounds(steps)?.contains(&x0) {
                return Err(HarnessError::Config("initial_rates outside the rate bounds".into()));
            }
            Ok(x0)
        }
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    family: &WaterfloodFamily,
    x0: &[f64],
    budget: usize,
    trial: usize,
) -> Result<TrialRecord> {
    let seed = trial_seed(cfg.seed_base, trial);
    let mut rng = seeded(seed);
    let failed = |reason: String, log: EvaluationLog, steps: usize| {
        log::warn!("trial {trial} (seed {seed}) failed: {reason}");
        TrialRecord {
            trial,
            seed,
            status: TrialStatus::Failed { reason },
            best_value: f64::NAN,
            best_schedule: Vec::new(),
            start_value: f64::NAN,
            steps_per_well: steps,
            termination: None,
            scales: Vec::new(),
            truncated: false,
            log,
        }
    };
    match &cfg.multiscale {
        Some(ms) => match run_multiscale(ms, &cfg.solver, family, x0, budget, &mut rng) {
            Ok(out) => {
                let last = out.final_scale().clone();
                Ok(TrialRecord {
                    trial,
                    seed,
                    status: TrialStatus::Completed,
                    best_value: last.best_value,
                    best_schedule: last.best_schedule.clone(),
                    start_value: out.scales[0].start_value,
                    steps_per_well: last.steps_per_well,
                    termination: Some(last.termination),
                    truncated: out.truncated,
                    scales: out.scales,
                    log: out.log,
                })
            }
            Err(wellopt_core::CoreError::Usage(m)) => Err(HarnessError::Config(m)),
            Err(e) => Ok(failed(e.to_string(), EvaluationLog::new(budget), ms.n0)),
        },
        None => {
            let steps = cfg.start_steps();
            let objective = family.objective_at(steps)?;
            let mut log = EvaluationLog::new(budget);
            match cfg.solver.run(&objective, x0, &mut log, budget, &mut rng, None) {
                Ok(out) => Ok(TrialRecord {
                    trial,
                    seed,
                    status: TrialStatus::Completed,
                    best_value: out.best_value,
                    best_schedule: out.best_point,
                    start_value: out.start_value,
                    steps_per_well: steps,
                    termination: Some(out.termination),
                    scales: Vec::new(),
                    truncated: false,
                    log,
                }),
                Err(wellopt_core::CoreError::Usage(m)) => Err(HarnessError::Config(m)),
                Err(e) => Ok(failed(e.to_string(), log, steps)),
            }
        }
    }
}
