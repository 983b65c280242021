use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Summary of per-trial best values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub count: usize,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation; undefined for a single trial.
    pub std: Option<f64>,
}

pub fn trial_stats(values: &[f64]) -> Result<TrialStats> {
    if values.is_empty() {
        return Err(HarnessError::Usage("statistics need at least one trial".into()));
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let std = (n > 1).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    });
    Ok(TrialStats {
        count: n,
        max: sorted[n - 1],
        min: sorted[0],
        mean,
        median,
        std,
    })
}
