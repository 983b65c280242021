//! Generalized pattern search with the maximal positive basis
//! `{+e_1..+e_D, -e_1..-e_D}`, complete polling, expansion by 2 on success
//! and contraction by 0.5 on failure. Poll points outside the unit box are
//! rejected without being evaluated.

use serde::{Deserialize, Serialize};

use crate::bounds::in_unit_box;
use crate::driver::{drive, RunOutcome, StopFn, Strategy};
use crate::error::{CoreError, Result};
use crate::log::EvaluationLog;
use crate::objective::Objective;
use crate::rng::{seeded, Rng};

pub const EXPANSION: f64 = 2.0;
pub const CONTRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpsConfig {
    /// Initial mesh size in normalized coordinates.
    pub initial_step: f64,
    /// Stop once the mesh size falls below this.
    pub min_step: f64,
}

impl Default for GpsConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            min_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpsState {
    pub center: Vec<f64>,
    pub center_value: f64,
    pub step: f64,
    pub iteration: usize,
}

/// A poll candidate; `point` is `None` when it fell outside the box.
#[derive(Debug, Clone, PartialEq)]
pub struct PollPoint {
    pub direction: usize,
    pub point: Option<Vec<f64>>,
}

/// All `2D` poll points in fixed order `+e_1..+e_D, -e_1..-e_D`.
pub fn poll_points(state: &GpsState) -> Vec<PollPoint> {
    let d = state.center.len();
    (0..2 * d)
        .map(|direction| {
            let (axis, sign) = if direction < d {
                (direction, 1.0)
            } else {
                (direction - d, -1.0)
            };
            let mut p = state.center.clone();
            p[axis] += sign * state.step;
            PollPoint {
                direction,
                point: in_unit_box(&p).then_some(p),
            }
        })
        .collect()
}

/// Complete-poll update. `values[i]` belongs to `poll[i]`; rejected points
/// must carry `f64::NEG_INFINITY`. The first strictly best improving
/// direction wins ties.
pub fn gps_step(state: &GpsState, poll: &[PollPoint], values: &[f64]) -> GpsState {
    let mut best: Option<(usize, f64)> = None;
    for (i, (pp, v)) in poll.iter().zip(values).enumerate() {
        if pp.point.is_some() && best.is_none_or(|(_, b)| *v > b) {
            best = Some((i, *v));
        }
    }
    match best {
        Some((i, v)) if v > state.center_value => GpsState {
            center: poll[i].point.clone().expect("feasible poll point"),
            center_value: v,
            step: state.step * EXPANSION,
            iteration: state.iteration + 1,
        },
        _ => GpsState {
            center: state.center.clone(),
            center_value: state.center_value,
            step: state.step * CONTRACTION,
            iteration: state.iteration + 1,
        },
    }
}

enum Phase {
    Start,
    CenterPending,
    Polling(Vec<PollPoint>),
}

pub struct Gps {
    config: GpsConfig,
    state: GpsState,
    phase: Phase,
}

impl Gps {
    pub fn new(x0: Vec<f64>, config: GpsConfig) -> Result<Self> {
        if !in_unit_box(&x0) {
            return Err(CoreError::Infeasible);
        }
        if !(config.initial_step > 0.0 && config.min_step > 0.0) {
            return Err(CoreError::Usage("GPS steps must be positive".into()));
        }
        Ok(Self {
            state: GpsState {
                center: x0,
                center_value: f64::NEG_INFINITY,
                step: config.initial_step,
                iteration: 0,
            },
            config,
            phase: Phase::Start,
        })
    }

    pub fn state(&self) -> &GpsState {
        &self.state
    }
}

impl Strategy for Gps {
    fn propose(&mut self, _rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
        if let Phase::Start = self.phase {
            self.phase = Phase::CenterPending;
            return Ok(vec![self.state.center.clone()]);
        }
        loop {
            if self.state.step < self.config.min_step {
                return Ok(Vec::new());
            }
            let poll = poll_points(&self.state);
            let feasible: Vec<Vec<f64>> = poll.iter().filter_map(|p| p.point.clone()).collect();
            if feasible.is_empty() {
                // Every direction left the box: contract without evaluating.
                let values = vec![f64::NEG_INFINITY; poll.len()];
                self.state = gps_step(&self.state, &poll, &values);
                continue;
            }
            self.phase = Phase::Polling(poll);
            return Ok(feasible);
        }
    }

    fn observe(&mut self, values: &[f64]) -> Result<()> {
        match std::mem::replace(&mut self.phase, Phase::CenterPending) {
            Phase::CenterPending => {
                self.state.center_value = values[0];
            }
            Phase::Polling(poll) => {
                let mut it = values.iter();
                let full: Vec<f64> = poll
                    .iter()
                    .map(|p| match p.point {
                        Some(_) => *it.next().expect("value per feasible point"),
                        None => f64::NEG_INFINITY,
                    })
                    .collect();
                self.state = gps_step(&self.state, &poll, &full);
            }
            Phase::Start => return Err(CoreError::Usage("observe before propose".into())),
        }
        Ok(())
    }

    fn next_batch_hint(&self) -> Option<usize> {
        match self.phase {
            Phase::Start => Some(1),
            _ => None,
        }
    }
}

/// Run GPS from `x0` (objective units). The returned best is the final
/// center. Deterministic: no random numbers are drawn.
pub fn run_gps(
    objective: &dyn Objective,
    x0: &[f64],
    budget: usize,
    config: GpsConfig,
) -> Result<(RunOutcome, EvaluationLog)> {
    if budget == 0 {
        return Err(CoreError::Usage("GPS budget must be at least 1".into()));
    }
    let bounds = objective.bounds();
    if !bounds.contains(x0) {
        return Err(CoreError::Infeasible);
    }
    let mut gps = Gps::new(bounds.normalize(x0)?, config)?;
    let mut log = EvaluationLog::new(budget);
    let mut rng = seeded(0);
    let out = drive(&mut gps, objective, &mut log, budget, &mut rng, None::<&mut StopFn>)?;
    Ok((out, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Bounds;
    use crate::objective::FnObjective;

    fn state(center: Vec<f64>, value: f64, step: f64) -> GpsState {
        GpsState {
            center,
            center_value: value,
            step,
            iteration: 0,
        }
    }

    #[test]
    fn maximal_basis_poll_order() {
        let pts = poll_points(&state(vec![0.5, 0.5], 0.0, 0.25));
        let got: Vec<Vec<f64>> = pts.into_iter().map(|p| p.point.unwrap()).collect();
        assert_eq!(
            got,
            vec![vec![0.75, 0.5], vec![0.5, 0.75], vec![0.25, 0.5], vec![0.5, 0.25]]
        );
    }

    #[test]
    fn out_of_box_rejected() {
        let pts = poll_points(&state(vec![0.0, 0.5], 0.0, 0.25));
        assert_eq!(pts.len(), 4);
        assert!(pts[2].point.is_none());
        assert_eq!(pts.iter().filter(|p| p.point.is_none()).count(), 1);
    }

    #[test]
    fn boundary_points_are_feasible() {
        let pts = poll_points(&state(vec![0.5], 0.0, 0.5));
        assert_eq!(pts[0].point, Some(vec![1.0]));
        assert_eq!(pts[1].point, Some(vec![0.0]));
    }

    #[test]
    fn expands_on_success() {
        let s = state(vec![0.5, 0.5], 5.0, 0.25);
        let poll = poll_points(&s);
        let next = gps_step(&s, &poll, &[1.0, 2.0, 6.0, 3.0]);
        assert_eq!(next.center, vec![0.25, 0.5]);
        assert_eq!(next.center_value, 6.0);
        assert_eq!(next.step, 0.5);
        assert_eq!(next.iteration, 1);
    }

    #[test]
    fn contracts_on_failure() {
        let s = state(vec![0.5, 0.5], 5.0, 0.25);
        let poll = poll_points(&s);
        let next = gps_step(&s, &poll, &[1.0, 5.0, 4.0, 3.0]);
        assert_eq!(next.center, s.center);
        assert_eq!(next.step, 0.125);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let s = state(vec![0.5, 0.5], 5.0, 0.25);
        let poll = poll_points(&s);
        let next = gps_step(&s, &poll, &[1.0, 6.0, 2.0, 6.0]);
        assert_eq!(next.center, vec![0.5, 0.75]);
    }

    #[test]
    fn rejected_points_never_win() {
        let s = state(vec![0.0, 0.5], 5.0, 0.25);
        let poll = poll_points(&s);
        let next = gps_step(&s, &poll, &[1.0, 2.0, f64::NEG_INFINITY, 3.0]);
        assert_eq!(next.center, s.center);
    }

    #[test]
    fn converges_on_1d_quadratic() {
        // Maximizer at 0.3; GPS walks the mesh from 0.9.
        let obj = FnObjective::new(Bounds::uniform(1, 0.0, 1.0).unwrap(), |z: &[f64]| {
            -(z[0] - 0.3).powi(2)
        });
        let cfg = GpsConfig {
            min_step: 1e-6,
            ..Default::default()
        };
        let (out, log) = run_gps(&obj, &[0.9], 200, cfg).unwrap();
        assert!((out.best_point[0] - 0.3).abs() < 1e-4, "{:?}", out.best_point);
        assert!(log.consumed() <= 200);
    }

    #[test]
    fn budget_one_returns_start() {
        let obj = FnObjective::new(Bounds::uniform(2, 0.0, 1.0).unwrap(), |z: &[f64]| z[0]);
        let (out, log) = run_gps(&obj, &[0.2, 0.4], 1, GpsConfig::default()).unwrap();
        assert_eq!(out.best_point, vec![0.2, 0.4]);
        assert_eq!(out.best_value, 0.2);
        assert_eq!(log.consumed(), 1);
        assert!(run_gps(&obj, &[0.2, 0.4], 0, GpsConfig::default()).is_err());
    }

    #[test]
    fn infeasible_start_rejected() {
        let obj = FnObjective::new(Bounds::uniform(1, 0.0, 1.0).unwrap(), |z: &[f64]| z[0]);
        assert!(matches!(
            run_gps(&obj, &[1.5], 10, GpsConfig::default()),
            Err(CoreError::Infeasible)
        ));
    }

    #[test]
    fn mesh_and_monotonicity_invariants() {
        let obj = FnObjective::new(Bounds::uniform(3, 0.0, 1.0).unwrap(), |z: &[f64]| {
            -(z[0] - 0.1).powi(2) - 2.0 * (z[1] - 0.77).powi(2) - (z[2] - 0.4).powi(2)
        });
        let mut gps = Gps::new(vec![0.5; 3], GpsConfig::default()).unwrap();
        let mut rng = seeded(0);
        let mut log = EvaluationLog::new(1000);
        let mut prev_value = f64::NEG_INFINITY;
        loop {
            let batch = gps.propose(&mut rng).unwrap();
            if batch.is_empty() {
                break;
            }
            assert!(batch.len() <= 6);
            let phys = batch.clone();
            let values = crate::log::evaluate_batch(&phys, &obj, &mut log).unwrap();
            gps.observe(&values).unwrap();
            let s = gps.state();
            assert!(s.center_value >= prev_value);
            prev_value = s.center_value;
            let k = (s.step / 0.25).log2();
            assert_eq!(k, k.round());
        }
        assert!(gps.state().step < 1e-3);
    }
}
