//! The ask/evaluate/tell loop shared by all optimizers.
//!
//! Strategies work in normalized `[0,1]^D` coordinates; the driver maps
//! proposals back through the objective's bounds, evaluates them as one
//! batch, and tracks the best evaluated point.

use serde::{Deserialize, Serialize};

use crate::bounds::in_unit_box;
use crate::error::{CoreError, Result};
use crate::log::{evaluate_batch, EvaluationLog};
use crate::objective::Objective;
use crate::rng::Rng;

/// One optimizer expressed as a proposal/observation state machine.
pub trait Strategy {
    /// Next batch of normalized points. An empty batch means the strategy
    /// has met its own convergence test.
    fn propose(&mut self, rng: &mut Rng) -> Result<Vec<Vec<f64>>>;

    /// Objective values for the last proposed batch, in proposal order.
    fn observe(&mut self, values: &[f64]) -> Result<()>;

    /// Evaluations needed for the next iteration, if known before proposing.
    fn next_batch_hint(&self) -> Option<usize> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// The strategy's own tolerance was met.
    Converged,
    /// The next batch did not fit the remaining budget.
    BudgetExhausted,
    /// The caller's stop predicate fired.
    Stopped,
}

/// Snapshot handed to the stop predicate after every iteration.
#[derive(Debug)]
pub struct IterationReport<'a> {
    pub iteration: usize,
    /// Best evaluated point so far (normalized).
    pub best_normalized: &'a [f64],
    pub best_value: f64,
    pub consumed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// Best evaluated point in objective units.
    pub best_point: Vec<f64>,
    pub best_value: f64,
    /// Value of the first evaluated point (the initial guess).
    pub start_value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

pub type StopFn<'a> = dyn FnMut(&IterationReport<'_>) -> bool + 'a;

/// Run `strategy` until convergence, budget exhaustion, or `stop`.
///
/// `limit` caps `log.consumed()` for this run (it may be lower than the
/// log's own budget, e.g. for one scale of a multiscale run). An iteration
/// whose batch does not fit is never started.
pub fn drive(
    strategy: &mut dyn Strategy,
    objective: &dyn Objective,
    log: &mut EvaluationLog,
    limit: usize,
    rng: &mut Rng,
    mut stop: Option<&mut StopFn<'_>>,
) -> Result<RunOutcome> {
    let limit = limit.min(log.budget_max());
    let bounds = objective.bounds().clone();
    let start_consumed = log.consumed();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut start_value = None;
    let mut iterations = 0;

    let termination = loop {
        let room = limit.saturating_sub(log.consumed());
        if let Some(n) = strategy.next_batch_hint() {
            if n > room {
                break Termination::BudgetExhausted;
            }
        }
        let batch = strategy.propose(rng)?;
        if batch.is_empty() {
            break Termination::Converged;
        }
        if batch.len() > room {
            break Termination::BudgetExhausted;
        }
        debug_assert!(batch.iter().all(|z| in_unit_box(z)));
        let physical = batch
            .iter()
            .map(|z| bounds.denormalize(z))
            .collect::<Result<Vec<_>>>()?;
        let values = evaluate_batch(&physical, objective, log)?;
        if start_value.is_none() {
            start_value = Some(values[0]);
        }
        for (z, v) in batch.iter().zip(&values) {
            if !v.is_nan() && best.as_ref().is_none_or(|(_, b)| *v > *b) {
                best = Some((z.clone(), *v));
            }
        }
        strategy.observe(&values)?;
        iterations += 1;

        if let (Some(stop), Some((z, v))) = (stop.as_deref_mut(), best.as_ref()) {
            let report = IterationReport {
                iteration: iterations,
                best_normalized: z,
                best_value: *v,
                consumed: log.consumed(),
            };
            if stop(&report) {
                break Termination::Stopped;
            }
        }
    };

    let (z, best_value) = best.ok_or_else(|| {
        CoreError::Usage("budget does not cover a single iteration".into())
    })?;
    Ok(RunOutcome {
        best_point: bounds.denormalize(&z)?,
        best_value,
        start_value: start_value.unwrap_or(best_value),
        iterations,
        evaluations: log.consumed() - start_consumed,
        termination,
    })
}
