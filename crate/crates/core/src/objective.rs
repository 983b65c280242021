use crate::bounds::Bounds;
use crate::error::{EvalError, Result};

/// Black-box scalar objective to be maximized over a box.
///
/// Implementations must be pure: the same point always yields the same
/// value, and distinct points may be evaluated concurrently.
pub trait Objective: Send + Sync {
    fn bounds(&self) -> &Bounds;

    /// Value at a point given in the objective's own (physical) units.
    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError>;

    fn dim(&self) -> usize {
        self.bounds().dim()
    }
}

/// Closure-backed objective.
pub struct FnObjective<F> {
    bounds: Bounds,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(bounds: Bounds, f: F) -> Self {
        Self { bounds, f }
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok((self.f)(x))
    }
}

/// A family of objectives indexed by the number of control steps per well,
/// used by the multiscale driver to move between control resolutions.
pub trait ObjectiveFamily: Sync {
    fn wells(&self) -> usize;

    fn objective(&self, steps_per_well: usize) -> Result<Box<dyn Objective>>;
}
