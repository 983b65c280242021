//! Box constraints and the affine map onto the unit hypercube.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Per-variable lower/upper limits. All optimizers search the unit box and
/// map back through [`Bounds::denormalize`] before evaluating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(CoreError::InvalidBounds("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(CoreError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(CoreError::InvalidBounds(format!(
                    "variable {j}: lower {lo} must be strictly below upper {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Same interval `[lo, hi]` for every one of `dim` variables.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `z[j] = (u[j] - lower[j]) / (upper[j] - lower[j])`.
    pub fn normalize(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        Ok(u
            .iter()
            .enumerate()
            .map(|(j, v)| (v - self.lower[j]) / self.width(j))
            .collect())
    }

    pub fn denormalize(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_len(z)?;
        Ok(z
            .iter()
            .enumerate()
            .map(|(j, v)| self.lower[j] + v * self.width(j))
            .collect())
    }

    /// Repeat every entry `times` times in place, matching the layout of a
    /// schedule whose control steps were each split `times` ways.
    pub fn repeat_each(&self, times: usize) -> Self {
        let rep = |v: &[f64]| {
            v.iter()
                .flat_map(|x| std::iter::repeat_n(*x, times))
                .collect::<Vec<_>>()
        };
        Self {
            lower: rep(&self.lower),
            upper: rep(&self.upper),
        }
    }
}

/// Unit box membership, used by the normalized-space optimizers.
pub fn in_unit_box(z: &[f64]) -> bool {
    z.iter().all(|v| (0.0..=1.0).contains(v))
}
