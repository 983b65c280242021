//! CSV and JSON artifacts of an experiment.
//!
//! Layout of a result directory:
//!
//! ```text
//! manifest.json          config, config hash, seeds, trial status
//! aggregate.csv          label,solver,trials,completed,max,min,mean,median,std
//! beanplot.csv           label,trial,npv
//! curves/trial_<t>.csv   evaluations,best_npv
//! runs_p<P>.csv          trial,runs,best_npv
//! logs/trial_<t>.json    full trial record with every evaluation
//! ```
//!
//! Every file is written to a temporary name and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wellopt_core::best_so_far_curve;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::{ExperimentReport, TrialRecord, TrialStatus};
use crate::runs::{runs_curve, Processors};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub label: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub dimension: usize,
    pub budget: usize,
    pub trials: Vec<ManifestTrial>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestTrial {
    pub trial: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub status: TrialStatus,
    pub best_value: Option<f64>,
    pub evaluations: usize,
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn aggregate_csv(reports: &[&ExperimentReport]) -> String {
    let mut out = String::from("label,solver,trials,completed,max,min,mean,median,std\n");
    for r in reports {
        let stats = r.stats();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.label,
            r.config.solver.name(),
            r.trials.len(),
            r.completed_bests().len(),
            opt(stats.map(|s| s.max)),
            opt(stats.map(|s| s.min)),
            opt(stats.map(|s| s.mean)),
            opt(stats.map(|s| s.median)),
            opt(stats.and_then(|s| s.std)),
        );
    }
    out
}

pub fn beanplot_csv(reports: &[&ExperimentReport]) -> String {
    let mut out = String::from("label,trial,npv\n");
    for r in reports {
        for t in r.trials.iter().filter(|t| t.completed()) {
            let _ = writeln!(out, "{},{},{}", r.label, t.trial, t.best_value);
        }
    }
    out
}

pub fn curve_csv(trial: &TrialRecord) -> String {
    let mut out = String::from("evaluations,best_npv\n");
    for (n, best) in best_so_far_curve(&trial.log) {
        let _ = writeln!(out, "{n},{best}");
    }
    out
}

pub fn runs_csv(report: &ExperimentReport, processors: Processors) -> String {
    let mut out = String::from("trial,runs,best_npv\n");
    for t in report.trials.iter().filter(|t| t.completed()) {
        for (runs, best) in runs_curve(&t.log, processors) {
            let _ = writeln!(out, "{},{runs},{best}", t.trial);
        }
    }
    out
}

pub fn manifest(report: &ExperimentReport, files: Vec<String>) -> Manifest {
    Manifest {
        label: report.label.clone(),
        config_hash: report.config_hash.clone(),
        config: report.config.clone(),
        dimension: report.dimension,
        budget: report.budget,
        trials: report
            .trials
            .iter()
            .map(|t| ManifestTrial {
                trial: t.trial,
                seed: t.seed,
                status: t.status.clone(),
                best_value: t.completed().then_some(t.best_value),
                evaluations: t.log.consumed(),
            })
            .collect(),
        files,
    }
}

/// Write all artifacts of `report` under `dir`; returns the relative paths.
pub fn export(report: &ExperimentReport, dir: &Path) -> Result<Vec<String>> {
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    for t in &report.trials {
        files.push((format!("logs/trial_{}.json", t.trial), serde_json::to_vec(t)?));
        if t.completed() {
            files.push((format!("curves/trial_{}.csv", t.trial), curve_csv(t).into_bytes()));
        }
    }
    files.push(("aggregate.csv".into(), aggregate_csv(&[report]).into_bytes()));
    files.push(("beanplot.csv".into(), beanplot_csv(&[report]).into_bytes()));
    for p in &report.config.processors {
        files.push((format!("runs_p{p}.csv"), runs_csv(report, *p).into_bytes()));
    }
    let names: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    for (name, bytes) in &files {
        write_atomic(&dir.join(name), bytes)?;
    }
    let m = manifest(report, names.clone());
    write_atomic(&dir.join("manifest.json"), &serde_json::to_vec_pretty(&m)?)?;
    let mut all = names;
    all.push("manifest.json".into());
    Ok(all)
}

/// Rebuild a report from a result directory written by [`export`].
pub fn load_report(dir: &Path) -> Result<ExperimentReport> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    let m: Manifest = serde_json::from_str(&text)?;
    let mut trials = Vec::with_capacity(m.trials.len());
    for t in &m.trials {
        let p: PathBuf = dir.join(format!("logs/trial_{}.json", t.trial));
        let text = fs::read_to_string(&p).map_err(|e| HarnessError::io(&p, e))?;
        trials.push(serde_json::from_str::<TrialRecord>(&text)?);
    }
    Ok(ExperimentReport {
        label: m.label,
        config: m.config,
        config_hash: m.config_hash,
        dimension: m.dimension,
        budget: m.budget,
        trials,
    })
}
