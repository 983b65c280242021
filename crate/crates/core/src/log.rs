//! Evaluation accounting: every objective call is appended to an
//! [`EvaluationLog`] together with the batch (optimizer iteration) that
//! proposed it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::objective::Objective;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub batch: usize,
    pub point: Vec<f64>,
    /// Objective value; NaN when the evaluator failed (`null` in JSON).
    #[serde(with = "nan_as_null")]
    pub value: f64,
}

/// Serde adapter writing NaN as `null` and reading `null` back as NaN.
pub mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationLog {
    entries: Vec<LogEntry>,
    budget_max: usize,
    next_batch: usize,
}

impl EvaluationLog {
    pub fn new(budget_max: usize) -> Self {
        Self {
            entries: Vec::new(),
            budget_max,
            next_batch: 0,
        }
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn budget_max(&self) -> usize {
        self.budget_max
    }

    pub fn consumed(&self) -> usize {
        self.entries.len()
    }

    pub fn remaining(&self) -> usize {
        self.budget_max - self.entries.len()
    }

    /// Number of batches recorded so far.
    pub fn batch_count(&self) -> usize {
        self.next_batch
    }

    /// Sizes of the recorded batches, in order.
    pub fn batch_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.next_batch];
        for e in &self.entries {
            sizes[e.batch] += 1;
        }
        sizes.retain(|s| *s > 0);
        sizes
    }

    /// Best finite value recorded, with its entry index.
    pub fn best(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            if e.value.is_finite() && best.is_none_or(|(_, b)| e.value > b) {
                best = Some((i, e.value));
            }
        }
        best
    }
}

/// Evaluate `points` as one batch, appending them to `log` in input order.
///
/// The whole batch is rejected before any evaluation when it does not fit
/// the remaining budget. Points are evaluated concurrently on the current
/// rayon pool. If the evaluator fails, every point is still logged (failures
/// as NaN) and the first failure is returned.
pub fn evaluate_batch(
    points: &[Vec<f64>],
    objective: &dyn Objective,
    log: &mut EvaluationLog,
) -> Result<Vec<f64>> {
    if points.len() > log.remaining() {
        return Err(CoreError::BudgetExhausted {
            requested: points.len(),
            remaining: log.remaining(),
        });
    }
    for p in points {
        if p.len() != objective.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: objective.dim(),
                got: p.len(),
            });
        }
    }
    let results: Vec<_> = points.par_iter().map(|p| objective.evaluate(p)).collect();

    let batch = log.next_batch;
    log.next_batch += 1;
    let mut first_err = None;
    let mut values = Vec::with_capacity(points.len());
    for (i, (p, r)) in points.iter().zip(results).enumerate() {
        let value = match r {
            Ok(v) => v,
            Err(e) => {
                first_err.get_or_insert(CoreError::Evaluation { index: i, source: e });
                f64::NAN
            }
        };
        log.entries.push(LogEntry {
            batch,
            point: p.clone(),
            value,
        });
        values.push(value);
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(values),
    }
}

/// Running maximum of the logged values: `(evaluations consumed, best)`.
/// Failed evaluations carry the previous best forward.
pub fn best_so_far_curve(log: &EvaluationLog) -> Vec<(usize, f64)> {
    let mut best = f64::NEG_INFINITY;
    log.entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if e.value > best {
                best = e.value;
            }
            (i + 1, best)
        })
        .collect()
}
