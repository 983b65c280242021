//! Successive-splitting multiscale refinement.
//!
//! The problem is first solved with `n0` control steps per well. The best
//! schedule is then split (every step becomes `ns` equal steps with the same
//! rate) and used as the initial guess at the next scale, until either the
//! final resolution is reached or the NPV gain between neighbouring scales
//! falls below a tolerance.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bounds::Bounds;
use crate::driver::{IterationReport, Termination};
use crate::error::{CoreError, Result};
use crate::log::EvaluationLog;
use crate::objective::ObjectiveFamily;
use crate::rng::Rng;
use crate::schedule::split_values;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultiscaleConfig {
    /// Control steps per well at the first scale.
    pub n0: usize,
    /// Split factor between scales.
    pub ns: usize,
    /// Control steps per well at the last scale; `n0 * ns^K`.
    pub max_steps: usize,
    /// A scale stops once the normalized incumbent move between consecutive
    /// iterations, averaged over the last `move_window` iterations, drops
    /// below this.
    pub scale_move_tol: f64,
    pub move_window: usize,
    /// Refinement stops once the relative NPV change between scales drops
    /// below this.
    pub scale_npv_tol: f64,
    /// Used in place of `|npv_prev|` when the previous scale's NPV is zero.
    pub npv_scale: f64,
    /// Scale `k` of `K` runs the solver with tolerances multiplied by
    /// `loosening^(K - k)`.
    pub loosening: f64,
}

impl Default for MultiscaleConfig {
    fn default() -> Self {
        Self::configuration_ii(8)
    }
}

impl MultiscaleConfig {
    fn preset(n0: usize, ns: usize, max_steps: usize) -> Self {
        Self {
            n0,
            ns,
            max_steps,
            scale_move_tol: 0.10,
            move_window: 3,
            scale_npv_tol: 0.10,
            npv_scale: 1.0,
            loosening: 2.0,
        }
    }

    /// `n0 = 1`, `ns = 2`: classic successive splitting.
    pub fn configuration_i(max_steps: usize) -> Self {
        Self::preset(1, 2, max_steps)
    }

    /// `n0 = 2`, `ns = 2`.
    pub fn configuration_ii(max_steps: usize) -> Self {
        Self::preset(2, 2, max_steps)
    }

    /// `n0 = 2`, `ns = 4`.
    pub fn configuration_iii(max_steps: usize) -> Self {
        Self::preset(2, 4, max_steps)
    }

    /// `n0 = 1`, `ns = 4`.
    pub fn configuration_iv(max_steps: usize) -> Self {
        Self::preset(1, 4, max_steps)
    }

    /// Look up a preset by roman numeral.
    pub fn named(label: &str, max_steps: usize) -> Option<Self> {
        match label {
            "I" => Some(Self::configuration_i(max_steps)),
            "II" => Some(Self::configuration_ii(max_steps)),
            "III" => Some(Self::configuration_iii(max_steps)),
            "IV" => Some(Self::configuration_iv(max_steps)),
            _ => None,
        }
    }

    /// Number of refinements `K` with `max_steps = n0 * ns^K`.
    pub fn refinements(&self) -> Result<usize> {
        if self.n0 == 0 || self.ns < 2 {
            return Err(CoreError::Usage("need n0 >= 1 and ns >= 2".into()));
        }
        let mut steps = self.n0;
        let mut k = 0;
        while steps < self.max_steps {
            steps *= self.ns;
            k += 1;
        }
        if steps != self.max_steps {
            return Err(CoreError::Usage(format!(
                "max_steps {} is not n0 * ns^K for n0={}, ns={}",
                self.max_steps, self.n0, self.ns
            )));
        }
        Ok(k)
    }

    /// Steps per well at every scale, coarsest first.
    pub fn scale_steps(&self) -> Result<Vec<usize>> {
        let k = self.refinements()?;
        Ok((0..=k).map(|i| self.n0 * self.ns.pow(i as u32)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.refinements()?;
        if !(self.scale_move_tol > 0.0 && self.scale_npv_tol > 0.0) {
            return Err(CoreError::Usage("scale tolerances must be positive".into()));
        }
        if self.move_window == 0 {
            return Err(CoreError::Usage("move_window must be at least 1".into()));
        }
        if !(self.loosening >= 1.0) {
            return Err(CoreError::Usage("loosening factor must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleResult {
    pub scale_index: usize,
    pub steps_per_well: usize,
    pub best_schedule: Vec<f64>,
    pub best_value: f64,
    /// Objective value of this scale's initial guess.
    pub start_value: f64,
    pub evaluations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleOutcome {
    pub scales: Vec<ScaleResult>,
    pub log: EvaluationLog,
    /// The total budget ran out before the refinement finished.
    pub truncated: bool,
}

impl MultiscaleOutcome {
    pub fn final_scale(&self) -> &ScaleResult {
        self.scales.last().expect("at least one scale")
    }
}

/// Mean over variables of `|current - last| / (upper - lower)`, strictly
/// below `tol`.
pub fn scale_converged(last: &[f64], current: &[f64], bounds: &Bounds, tol: f64) -> bool {
    mean_relative_move(last, current, bounds) < tol
}

fn mean_relative_move(last: &[f64], current: &[f64], bounds: &Bounds) -> f64 {
    let n = last.len() as f64;
    last.iter()
        .zip(current)
        .enumerate()
        .map(|(j, (a, b))| (b - a).abs() / bounds.width(j))
        .sum::<f64>()
        / n
}

/// Relative NPV change between neighbouring scales, strictly below `tol`.
/// When the previous NPV is zero the absolute change is compared with
/// `tol * npv_scale`.
pub fn global_converged(npv_prev: f64, npv_this: f64, tol: f64, npv_scale: f64) -> bool {
    let change = (npv_this - npv_prev).abs();
    if npv_prev == 0.0 {
        change < tol * npv_scale
    } else {
        change / npv_prev.abs() < tol
    }
}

/// Run the multiscale loop. `x0` holds `cfg.n0` steps per well, well-major,
/// in objective units.
///
/// Every scale but the last stops on its own once the incumbent settles
/// (see [`MultiscaleConfig::scale_move_tol`]); the last runs until the
/// solver converges or the budget is spent. Each scale may use at most
/// `remaining / remaining_scales` evaluations.
pub fn run_multiscale(
    cfg: &MultiscaleConfig,
    solver: &SolverConfig,
    family: &dyn ObjectiveFamily,
    x0: &[f64],
    total_budget: usize,
    rng: &mut Rng,
) -> Result<MultiscaleOutcome> {
    cfg.validate()?;
    let steps = cfg.scale_steps()?;
    let last_scale = steps.len() - 1;
    let wells = family.wells();
    if x0.len() != wells * cfg.n0 {
        return Err(CoreError::DimensionMismatch {
            expected: wells * cfg.n0,
            got: x0.len(),
        });
    }

    let mut log = EvaluationLog::new(total_budget);
    let mut scales: Vec<ScaleResult> = Vec::new();
    let mut guess = x0.to_vec();
    let mut truncated = false;

    for (k, &steps_per_well) in steps.iter().enumerate() {
        let objective = family.objective(steps_per_well)?;
        let bounds = objective.bounds().clone();
        let remaining_scales = steps.len() - k;
        let limit = log.consumed() + log.remaining() / remaining_scales;
        let tuned = solver.loosened(cfg.loosening.powi((last_scale - k) as i32));

        let unit = Bounds::uniform(bounds.dim(), 0.0, 1.0)?;
        let mut previous: Option<Vec<f64>> = None;
        let mut moves: VecDeque<f64> = VecDeque::new();
        let window = cfg.move_window;
        let tol = cfg.scale_move_tol;
        let mut settle = |r: &IterationReport<'_>| {
            let current = r.best_normalized.to_vec();
            if let Some(last) = previous.replace(current.clone()) {
                moves.push_back(mean_relative_move(&last, &current, &unit));
                if moves.len() > window {
                    moves.pop_front();
                }
            }
            moves.len() == window && moves.iter().sum::<f64>() / (window as f64) < tol
        };
        let stop: Option<&mut crate::driver::StopFn<'_>> =
            if k < last_scale { Some(&mut settle) } else { None };

        let before = log.consumed();
        let run = tuned.run(objective.as_ref(), &guess, &mut log, limit, rng, stop);
        let out = match run {
            Ok(out) => out,
            Err(CoreError::Usage(msg)) if log.consumed() == before => {
                // Not even one iteration fits what is left of the budget.
                log::info!("multiscale stopped at scale {k}: {msg}");
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        debug_assert!(bounds.contains(&out.best_point));
        scales.push(ScaleResult {
            scale_index: k,
            steps_per_well,
            best_schedule: out.best_point.clone(),
            best_value: out.best_value,
            start_value: out.start_value,
            evaluations: log.consumed() - before,
            termination: out.termination,
        });

        if k == last_scale {
            break;
        }
        if log.remaining() == 0 {
            truncated = true;
            break;
        }
        if k > 0 {
            let prev = scales[k - 1].best_value;
            if global_converged(prev, out.best_value, cfg.scale_npv_tol, cfg.npv_scale) {
                break;
            }
        }
        guess = refine(&out.best_point, wells, steps_per_well, cfg.ns);
    }

    if scales.is_empty() {
        return Err(CoreError::Usage(
            "budget does not cover a single iteration at the first scale".into(),
        ));
    }
    Ok(MultiscaleOutcome {
        scales,
        log,
        truncated,
    })
}

fn refine(values: &[f64], wells: usize, steps_per_well: usize, ns: usize) -> Vec<f64> {
    debug_assert_eq!(values.len(), wells * steps_per_well);
    split_values(values, ns)
}
