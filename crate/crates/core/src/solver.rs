use serde::{Deserialize, Serialize};

use crate::cmaes::{Cmaes, CmaesConfig};
use crate::driver::{drive, RunOutcome, StopFn, Strategy};
use crate::error::Result;
use crate::gps::{Gps, GpsConfig};
use crate::log::EvaluationLog;
use crate::objective::Objective;
use crate::pso::{Pso, PsoConfig};
use crate::rng::Rng;

/// Any of the three optimizers with its configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SolverConfig {
    Gps(GpsConfig),
    Pso(PsoConfig),
    Cmaes(CmaesConfig),
}

impl SolverConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Gps(_) => "GPS",
            Self::Pso(_) => "PSO",
            Self::Cmaes(_) => "CMA-ES",
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Self::Gps(_))
    }

    /// Copy with every convergence tolerance multiplied by `factor`.
    pub fn loosened(&self, factor: f64) -> Self {
        match *self {
            Self::Gps(c) => Self::Gps(GpsConfig {
                min_step: c.min_step * factor,
                ..c
            }),
            Self::Pso(c) => Self::Pso(c),
            Self::Cmaes(c) => Self::Cmaes(CmaesConfig {
                tol_x: c.tol_x * factor,
                ..c
            }),
        }
    }

    /// Build the strategy for a normalized start point.
    pub fn strategy(&self, x0_normalized: &[f64]) -> Result<Box<dyn Strategy>> {
        Ok(match *self {
            Self::Gps(c) => Box::new(Gps::new(x0_normalized.to_vec(), c)?),
            Self::Pso(c) => Box::new(Pso::new(x0_normalized.to_vec(), c)?),
            Self::Cmaes(c) => Box::new(Cmaes::new(x0_normalized, c)?),
        })
    }

    /// Optimize `objective` from `x0` (objective units), appending to `log`
    /// and never taking it past `limit` evaluations in total.
    pub fn run(
        &self,
        objective: &dyn Objective,
        x0: &[f64],
        log: &mut EvaluationLog,
        limit: usize,
        rng: &mut Rng,
        stop: Option<&mut StopFn<'_>>,
    ) -> Result<RunOutcome> {
        let bounds = objective.bounds();
        if !bounds.contains(x0) {
            return Err(crate::error::CoreError::Infeasible);
        }
        let mut strategy = self.strategy(&bounds.normalize(x0)?)?;
        drive(strategy.as_mut(), objective, log, limit, rng, stop)
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::Cmaes(CmaesConfig::default())
    }
}
