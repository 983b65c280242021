//! Piecewise-constant well-rate schedules.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Per-well piecewise-constant rates on an equal partition of the horizon.
///
/// Values are stored well-major: all steps of well 0, then well 1, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    wells: usize,
    steps_per_well: usize,
    values: Vec<f64>,
    horizon: f64,
}

impl ControlSchedule {
    pub fn new(wells: usize, steps_per_well: usize, values: Vec<f64>, horizon: f64) -> Result<Self> {
        if wells == 0 || steps_per_well == 0 {
            return Err(CoreError::Usage(
                "a schedule needs at least one well and one step".into(),
            ));
        }
        if values.len() != wells * steps_per_well {
            return Err(CoreError::DimensionMismatch {
                expected: wells * steps_per_well,
                got: values.len(),
            });
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(CoreError::Usage(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self {
            wells,
            steps_per_well,
            values,
            horizon,
        })
    }

    /// Every step of well `w` at `rates[w]`.
    pub fn constant(rates: &[f64], steps_per_well: usize, horizon: f64) -> Result<Self> {
        let values = rates
            .iter()
            .flat_map(|r| std::iter::repeat_n(*r, steps_per_well))
            .collect();
        Self::new(rates.len(), steps_per_well, values, horizon)
    }

    pub fn wells(&self) -> usize {
        self.wells
    }

    pub fn steps_per_well(&self) -> usize {
        self.steps_per_well
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn rate(&self, well: usize, step: usize) -> f64 {
        self.values[well * self.steps_per_well + step]
    }

    pub fn well_rates(&self, well: usize) -> &[f64] {
        let start = well * self.steps_per_well;
        &self.values[start..start + self.steps_per_well]
    }

    /// Time of edge `k` (0..=steps_per_well).
    ///
    /// Computed as `horizon * (k / n)` so that the edges of a split schedule
    /// coincide bit-for-bit with the edges of its parent.
    pub fn edge(&self, k: usize) -> f64 {
        self.horizon * (k as f64 / self.steps_per_well as f64)
    }

    pub fn step_edges(&self) -> Vec<f64> {
        (0..=self.steps_per_well).map(|k| self.edge(k)).collect()
    }

    /// Each control step becomes `ns` equal steps carrying the same rate.
    pub fn split(&self, ns: usize) -> Result<Self> {
        if ns < 2 {
            return Err(CoreError::Usage(format!("split factor must be >= 2, got {ns}")));
        }
        Ok(Self {
            wells: self.wells,
            steps_per_well: self.steps_per_well * ns,
            values: split_values(&self.values, ns),
            horizon: self.horizon,
        })
    }
}

/// Variable `n` (1-based) of the refined vector takes source variable
/// `ceil(n / ns)`. Applied to a well-major vector this replicates every
/// step of every well `ns` times.
pub fn split_values(values: &[f64], ns: usize) -> Vec<f64> {
    (1..=values.len() * ns)
        .map(|n| values[n.div_ceil(ns) - 1])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_two() {
        assert_eq!(split_values(&[20.0, 40.0], 2), vec![20.0, 20.0, 40.0, 40.0]);
    }

    #[test]
    fn split_four() {
        let out = split_values(&[1.0, 2.0], 4);
        assert_eq!(out, vec![1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn ceiling_index() {
        assert_eq!(3usize.div_ceil(2), 2);
    }

    #[test]
    fn split_is_per_well() {
        let s = ControlSchedule::new(2, 2, vec![1.0, 2.0, 3.0, 4.0], 720.0).unwrap();
        let r = s.split(2).unwrap();
        assert_eq!(r.steps_per_well(), 4);
        assert_eq!(r.well_rates(0), &[1.0, 1.0, 2.0, 2.0]);
        assert_eq!(r.well_rates(1), &[3.0, 3.0, 4.0, 4.0]);
    }

    #[test]
    fn split_edges_coincide() {
        let s = ControlSchedule::constant(&[1.0], 3, 720.0).unwrap();
        for ns in [2usize, 3, 4, 7] {
            let r = s.split(ns).unwrap();
            for k in 0..=3 {
                assert_eq!(s.edge(k).to_bits(), r.edge(k * ns).to_bits());
            }
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ControlSchedule::new(2, 2, vec![1.0; 3], 10.0).is_err());
        assert!(ControlSchedule::new(1, 1, vec![1.0], 0.0).is_err());
        let s = ControlSchedule::constant(&[1.0], 1, 1.0).unwrap();
        assert!(s.split(1).is_err());
    }
}
