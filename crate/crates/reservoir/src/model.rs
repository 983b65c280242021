//! Reservoir description, the five-spot Model 1 and its JSON case files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wellopt_core::{Bounds, ControlSchedule};

use crate::economics::EconomicParams;
use crate::error::{Result, SimError};
use crate::fluid::FluidRock;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    /// Cell sizes, m.
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl Grid {
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

/// Permeability in mD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermeabilityField {
    Uniform(f64),
    /// Four homogeneous quadrants split at the grid center. Cells with
    /// `(i - c)(j - c) >= 0` (the quadrants on the main diagonal and the
    /// center lines) take `diagonal`, the others `off_diagonal`. The layout
    /// is invariant under a 180° rotation.
    Quadrants { diagonal: f64, off_diagonal: f64 },
    /// Per cell, `j * nx + i` ordering.
    Cells(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WellKind {
    Injector,
    Producer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Well {
    pub name: String,
    /// Zero-based cell coordinates.
    pub i: usize,
    pub j: usize,
    pub kind: WellKind,
    /// Fixed liquid rate (m³/day) for uncontrolled wells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_rate: Option<f64>,
    /// Rate bounds and initial rate (m³/day) for controlled producers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<RateControl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateControl {
    pub lower: f64,
    pub upper: f64,
    pub initial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirModel {
    pub grid: Grid,
    pub permeability: PermeabilityField,
    pub porosity: f64,
    pub ntg: f64,
    /// Production horizon, days.
    pub horizon: f64,
    pub initial_sw: f64,
    /// Pa.
    pub initial_pressure: f64,
    pub wells: Vec<Well>,
}

impl ReservoirModel {
    pub fn permeability_cells(&self) -> Vec<f64> {
        let g = &self.grid;
        match &self.permeability {
            PermeabilityField::Uniform(k) => vec![*k; g.cells()],
            PermeabilityField::Cells(v) => v.clone(),
            PermeabilityField::Quadrants {
                diagonal,
                off_diagonal,
            } => {
                let ci = (g.nx as f64 - 1.0) / 2.0;
                let cj = (g.ny as f64 - 1.0) / 2.0;
                let mut out = Vec::with_capacity(g.cells());
                for j in 0..g.ny {
                    for i in 0..g.nx {
                        let same_side = (i as f64 - ci) * (j as f64 - cj) >= 0.0;
                        out.push(if same_side { *diagonal } else { *off_diagonal });
                    }
                }
                out
            }
        }
    }

    /// Producers whose rates are optimization variables, in model order.
    pub fn controlled_wells(&self) -> impl Iterator<Item = (usize, &Well, RateControl)> {
        self.wells
            .iter()
            .enumerate()
            .filter_map(|(k, w)| w.control.map(|c| (k, w, c)))
    }

    pub fn validate(&self, fluid: &FluidRock) -> Result<()> {
        let g = &self.grid;
        let bad = |m: String| Err(SimError::InvalidModel(m));
        if g.nx == 0 || g.ny == 0 || !(g.dx > 0.0 && g.dy > 0.0 && g.dz > 0.0) {
            return bad(format!("degenerate grid {g:?}"));
        }
        let perm = self.permeability_cells();
        if perm.len() != g.cells() || perm.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
            return bad("permeability must be positive on every cell".into());
        }
        if !(self.porosity > 0.0 && self.porosity < 1.0) {
            return bad(format!("porosity {} outside (0, 1)", self.porosity));
        }
        if !(self.ntg > 0.0 && self.ntg <= 1.0) {
            return bad(format!("net-to-gross {} outside (0, 1]", self.ntg));
        }
        if !(self.horizon > 0.0) {
            return bad("horizon must be positive".into());
        }
        if self.initial_sw < fluid.swc || self.initial_sw > 1.0 - fluid.sor {
            return bad("initial water saturation outside [Swc, 1 - Sor]".into());
        }
        let mut seen = std::collections::HashSet::new();
        for w in &self.wells {
            if w.i >= g.nx || w.j >= g.ny {
                return bad(format!("well {} outside the grid", w.name));
            }
            if !seen.insert((w.i, w.j)) {
                return bad(format!("well {} shares a cell with another well", w.name));
            }
            match (w.kind, w.fixed_rate, w.control) {
                (_, Some(r), None) if r >= 0.0 => {}
                (WellKind::Producer, None, Some(c))
                    if c.lower >= 0.0 && c.lower < c.upper && (c.lower..=c.upper).contains(&c.initial) => {}
                _ => {
                    return bad(format!(
                        "well {} needs either a non-negative fixed rate or (producers only) a rate control",
                        w.name
                    ))
                }
            }
        }
        if self.controlled_wells().next().is_none() {
            return bad("no controlled producers".into());
        }
        Ok(())
    }
}

/// Everything needed to evaluate a control schedule: model, fluid, prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfloodCase {
    pub model: ReservoirModel,
    #[serde(default)]
    pub fluid: FluidRock,
    #[serde(default)]
    pub economics: EconomicParams,
}

impl WaterfloodCase {
    pub fn validate(&self) -> Result<()> {
        self.fluid.validate()?;
        self.model.validate(&self.fluid)?;
        self.economics.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let case: Self = serde_json::from_str(&text)?;
        case.validate()?;
        Ok(case)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn controlled_count(&self) -> usize {
        self.model.controlled_wells().count()
    }

    /// Bounds for `steps_per_well` steps on every controlled well, well-major.
    pub fn bounds(&self, steps_per_well: usize) -> Result<Bounds> {
        let (lower, upper): (Vec<f64>, Vec<f64>) = self
            .model
            .controlled_wells()
            .map(|(_, _, c)| (c.lower, c.upper))
            .unzip();
        Ok(Bounds::new(lower, upper)?.repeat_each(steps_per_well))
    }

    pub fn initial_schedule(&self, steps_per_well: usize) -> Result<ControlSchedule> {
        let rates: Vec<f64> = self.model.controlled_wells().map(|(_, _, c)| c.initial).collect();
        Ok(ControlSchedule::constant(&rates, steps_per_well, self.model.horizon)?)
    }
}

/// Five-spot on an `n x n` grid covering `extent x extent` m: injector at the
/// center, producers `offset` cells in from each corner, numbered
/// counterclockwise from `(offset, offset)`.
fn five_spot(n: usize, offset: usize, extent: f64) -> ReservoirModel {
    let c = n / 2;
    let far = n - 1 - offset;
    let producer = |name: &str, i, j, upper| Well {
        name: name.into(),
        i,
        j,
        kind: WellKind::Producer,
        fixed_rate: None,
        control: Some(RateControl {
            lower: 0.0,
            upper,
            initial: 20.0,
        }),
    };
    ReservoirModel {
        grid: Grid {
            nx: n,
            ny: n,
            dx: extent / n as f64,
            dy: extent / n as f64,
            dz: 5.0,
        },
        permeability: PermeabilityField::Quadrants {
            diagonal: 1000.0,
            off_diagonal: 100.0,
        },
        porosity: 0.2,
        ntg: 0.2,
        horizon: 720.0,
        initial_sw: 0.2,
        initial_pressure: 20e6,
        wells: vec![
            Well {
                name: "INJ-01".into(),
                i: c,
                j: c,
                kind: WellKind::Injector,
                fixed_rate: Some(240.0),
                control: None,
            },
            producer("PRO-01", offset, offset, 80.0),
            producer("PRO-02", offset, far, 40.0),
            producer("PRO-03", far, far, 80.0),
            producer("PRO-04", far, offset, 40.0),
        ],
    }
}

/// Model 1: 51 x 51 cells of 10 x 10 x 5 m, five-spot, 720 days.
pub fn build_model1() -> WaterfloodCase {
    WaterfloodCase {
        model: five_spot(51, 2, 510.0),
        fluid: FluidRock::default(),
        economics: EconomicParams::model1(),
    }
}

/// Desk-scale Model 1: same extent and wells on a 21 x 21 grid.
pub fn build_model1_desk() -> WaterfloodCase {
    WaterfloodCase {
        model: five_spot(21, 1, 510.0),
        fluid: FluidRock::default(),
        economics: EconomicParams::model1(),
    }
}
