//! IMPES two-phase simulation: implicit pressure, explicit upwind saturation.
//!
//! Pressure uses a backward-Euler weakly compressible balance with a
//! two-point flux on the five-point stencil. Saturation is advanced in
//! advective form so that compressive storage takes up fluid at the cell's
//! own flowing composition; the water held in that storage is tracked
//! separately to keep the water balance exact.

use serde::{Deserialize, Serialize};
use wellopt_core::ControlSchedule;

use crate::banded::BandedMatrix;
use crate::economics::{ProductionProfile, StepRates, WellRates};
use crate::error::{Result, SimError};
use crate::fluid::{fractional_flow, FluidRock};
use crate::model::{ReservoirModel, WellKind};

const MILLIDARCY: f64 = 9.869_233e-16;
const SECONDS_PER_DAY: f64 = 86_400.0;
const SATURATION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimOptions {
    /// Pressure step, days. Rate changes add extra pressure updates.
    pub pressure_step: f64,
    /// Courant number for the transport substeps, at most 1.
    pub cfl: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            pressure_step: 10.0,
            cfl: 0.5,
        }
    }
}

/// Field totals over the whole run, m³.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cumulative {
    pub oil: f64,
    pub water: f64,
    pub water_injected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub profile: ProductionProfile,
    pub cumulative: Cumulative,
    /// Final cell pressures, Pa.
    pub pressure: Vec<f64>,
    /// Final cell water saturations.
    pub saturation: Vec<f64>,
    /// Water volume taken up by compressive storage, m³.
    pub stored_water: f64,
    pub pressure_steps: usize,
    pub substeps: usize,
}

struct Face {
    a: usize,
    b: usize,
    /// Geometric transmissibility, m³·day⁻¹ per (Pa / Pa·s).
    trans: f64,
}

/// Immutable per-model data shared by all runs.
pub struct Simulator {
    model: ReservoirModel,
    fluid: FluidRock,
    options: SimOptions,
    faces: Vec<Face>,
    pore_volume: Vec<f64>,
    well_cells: Vec<usize>,
}

impl Simulator {
    pub fn new(model: ReservoirModel, fluid: FluidRock, options: SimOptions) -> Result<Self> {
        fluid.validate()?;
        model.validate(&fluid)?;
        if !(options.pressure_step > 0.0) || !(options.cfl > 0.0 && options.cfl <= 1.0) {
            return Err(SimError::InvalidModel(format!(
                "need pressure_step > 0 and 0 < cfl <= 1, got {options:?}"
            )));
        }
        let g = model.grid;
        let perm = model.permeability_cells();
        let harmonic = |a: usize, b: usize| 2.0 * perm[a] * perm[b] / (perm[a] + perm[b]) * MILLIDARCY;
        let scale = SECONDS_PER_DAY * model.ntg * g.dz;
        let mut faces = Vec::with_capacity(2 * g.cells());
        for j in 0..g.ny {
            for i in 0..g.nx {
                let c = g.index(i, j);
                if i + 1 < g.nx {
                    let e = g.index(i + 1, j);
                    faces.push(Face {
                        a: c,
                        b: e,
                        trans: scale * harmonic(c, e) * g.dy / g.dx,
                    });
                }
                if j + 1 < g.ny {
                    let n = g.index(i, j + 1);
                    faces.push(Face {
                        a: c,
                        b: n,
                        trans: scale * harmonic(c, n) * g.dx / g.dy,
                    });
                }
            }
        }
        let pv = g.dx * g.dy * g.dz * model.porosity * model.ntg;
        let well_cells = model.wells.iter().map(|w| g.index(w.i, w.j)).collect();
        Ok(Self {
            pore_volume: vec![pv; g.cells()],
            model,
            fluid,
            options,
            faces,
            well_cells,
        })
    }

    pub fn model(&self) -> &ReservoirModel {
        &self.model
    }

    pub fn fluid(&self) -> &FluidRock {
        &self.fluid
    }

    pub fn pore_volume(&self) -> &[f64] {
        &self.pore_volume
    }

    /// Well rates (m³/day) over control step `k`, in model well order.
    fn rates_at(&self, schedule: &ControlSchedule, k: usize) -> Vec<f64> {
        let mut controlled = 0;
        self.model
            .wells
            .iter()
            .map(|w| match w.fixed_rate {
                Some(r) => r,
                None => {
                    let r = schedule.rate(controlled, k);
                    controlled += 1;
                    r
                }
            })
            .collect()
    }

    fn check_schedule(&self, schedule: &ControlSchedule) -> Result<()> {
        let wells = self.model.controlled_wells().count();
        if schedule.wells() != wells {
            return Err(SimError::InvalidSchedule(format!(
                "schedule has {} wells, model controls {wells}",
                schedule.wells()
            )));
        }
        if schedule.horizon() != self.model.horizon {
            return Err(SimError::InvalidSchedule(format!(
                "schedule horizon {} differs from model horizon {}",
                schedule.horizon(),
                self.model.horizon
            )));
        }
        if let Some(v) = schedule.values().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(SimError::InvalidSchedule(format!("rate {v} is not a finite non-negative number")));
        }
        Ok(())
    }

    /// Pressure update times: the base grid, every edge where some rate
    /// changes, and the horizon.
    fn time_grid(&self, schedule: &ControlSchedule) -> Vec<f64> {
        let horizon = self.model.horizon;
        let mut times = vec![0.0];
        let mut k = 1;
        loop {
            let t = k as f64 * self.options.pressure_step;
            if t >= horizon {
                break;
            }
            times.push(t);
            k += 1;
        }
        let n = schedule.steps_per_well();
        for k in 1..n {
            let changes = (0..schedule.wells()).any(|w| schedule.rate(w, k) != schedule.rate(w, k - 1));
            if changes {
                times.push(schedule.edge(k));
            }
        }
        times.push(horizon);
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }

    pub fn run(&self, schedule: &ControlSchedule) -> Result<SimulationOutput> {
        self.check_schedule(schedule)?;
        let g = self.model.grid;
        let cells = g.cells();
        let fluid = &self.fluid;
        let c_t = fluid.c_t;
        let s_max = 1.0 - fluid.sor;
        let (s_lo, s_hi) = (fluid.swc - SATURATION_SLACK, s_max + SATURATION_SLACK);
        let edges = schedule.step_edges();
        let n_steps = schedule.steps_per_well();
        let nw = self.model.wells.len();

        let mut p = vec![self.model.initial_pressure; cells];
        let mut s = vec![self.model.initial_sw; cells];
        let mut f = vec![0.0; cells];
        let mut accum = vec![0.0; cells];
        let mut rate_sum = vec![0.0; cells];
        let mut inj = vec![0.0; cells];
        let mut storage = vec![0.0; cells];
        let mut matrix = BandedMatrix::zeros(cells, g.nx);
        let mut flows: Vec<(usize, usize, f64)> = Vec::with_capacity(self.faces.len());

        let mut step_oil = vec![0.0; n_steps];
        let mut step_water = vec![0.0; n_steps];
        let mut step_inj = vec![0.0; n_steps];
        let mut well_oil = vec![vec![0.0; n_steps]; nw];
        let mut well_water = vec![vec![0.0; n_steps]; nw];
        let mut cum = Cumulative::default();
        let mut stored_water = 0.0;
        let mut substeps = 0;
        let mut per_well = vec![0.0; 2 * nw];

        let times = self.time_grid(schedule);
        let mut k_step = 0;
        for window in times.windows(2) {
            let (t0, t1) = (window[0], window[1]);
            let dt_p = t1 - t0;
            while k_step + 1 < n_steps && edges[k_step + 1] <= t0 {
                k_step += 1;
            }
            let rates = self.rates_at(schedule, k_step);
            let mut q = vec![0.0; cells];
            inj.fill(0.0);
            for (w, well) in self.model.wells.iter().enumerate() {
                let c = self.well_cells[w];
                match well.kind {
                    WellKind::Injector => {
                        q[c] += rates[w];
                        inj[c] += rates[w];
                    }
                    WellKind::Producer => q[c] -= rates[w],
                }
            }

            // Pressure: (V c_t / dt) dp + sum T lam (dp_i - dp_j) = q - sum T lam (p_i - p_j)
            let lam: Vec<f64> = s.iter().map(|sw| fluid.total_mobility(*sw)).collect();
            matrix.clear();
            let mut rhs = q.clone();
            for (c, v) in self.pore_volume.iter().enumerate() {
                matrix.add(c, c, v * c_t / dt_p);
            }
            let mut face_t = Vec::with_capacity(self.faces.len());
            for face in &self.faces {
                let t = face.trans * 0.5 * (lam[face.a] + lam[face.b]);
                face_t.push(t);
                matrix.add(face.a, face.a, t);
                matrix.add(face.b, face.b, t);
                matrix.add(face.a, face.b, -t);
                let flux = t * (p[face.a] - p[face.b]);
                rhs[face.a] -= flux;
                rhs[face.b] += flux;
            }
            let factor = matrix
                .clone()
                .factor()
                .map_err(|e| SimError::Breakdown {
                    time: t0,
                    reason: format!("pressure matrix not positive definite at row {} (pivot {})", e.row, e.pivot),
                })?;
            factor.solve_in_place(&mut rhs);
            for (pc, dp) in p.iter_mut().zip(&rhs) {
                *pc += dp;
            }
            if let Some(c) = p.iter().position(|v| !v.is_finite()) {
                return Err(SimError::Breakdown {
                    time: t1,
                    reason: format!("non-finite pressure in cell {c}"),
                });
            }

            // Fluxes on faces, oriented upstream -> downstream.
            flows.clear();
            rate_sum.copy_from_slice(&q);
            for (face, t) in self.faces.iter().zip(&face_t) {
                let flux = t * (p[face.a] - p[face.b]);
                if flux > 0.0 {
                    flows.push((face.a, face.b, flux));
                } else if flux < 0.0 {
                    flows.push((face.b, face.a, -flux));
                }
                rate_sum[face.a] -= flux;
                rate_sum[face.b] += flux;
            }
            // Net inflow per cell equals its compressive storage rate.
            storage.copy_from_slice(&rate_sum);

            let mut t = t0;
            while t < t1 {
                for (fc, sw) in f.iter_mut().zip(&s) {
                    *fc = fractional_flow(*sw, fluid);
                }
                accum.fill(0.0);
                rate_sum.fill(0.0);
                for &(up, down, flux) in &flows {
                    let df = f[up] - f[down];
                    accum[down] += flux * df;
                    rate_sum[down] += flux * self.secant(s[up], s[down], df);
                }
                for c in 0..cells {
                    if inj[c] > 0.0 {
                        let df = 1.0 - f[c];
                        accum[c] += inj[c] * df;
                        rate_sum[c] += inj[c] * self.secant(s_max, s[c], df);
                    }
                }
                let max_rate = rate_sum
                    .iter()
                    .zip(&self.pore_volume)
                    .map(|(a, v)| a / v)
                    .fold(0.0, f64::max);
                let remaining = t1 - t;
                let dt = if max_rate * remaining > self.options.cfl {
                    self.options.cfl / max_rate
                } else {
                    remaining
                };

                // Producer and storage bookkeeping at the start-of-substep state.
                let mut sub_oil = 0.0;
                let mut sub_water = 0.0;
                let mut sub_inj = 0.0;
                per_well.fill(0.0);
                for (w, well) in self.model.wells.iter().enumerate() {
                    let c = self.well_cells[w];
                    let r = rates[w];
                    match well.kind {
                        WellKind::Injector => sub_inj += r * dt,
                        WellKind::Producer => {
                            let wv = r * f[c] * dt;
                            let ov = r * (1.0 - f[c]) * dt;
                            per_well[2 * w] = ov;
                            per_well[2 * w + 1] = wv;
                            sub_oil += ov;
                            sub_water += wv;
                        }
                    }
                }
                for c in 0..cells {
                    stored_water += storage[c] * f[c] * dt;
                }
                cum.oil += sub_oil;
                cum.water += sub_water;
                cum.water_injected += sub_inj;

                let t_next = if dt == remaining { t1 } else { t + dt };
                distribute(&edges, t, t_next, |k, frac| {
                    step_oil[k] += frac * sub_oil;
                    step_water[k] += frac * sub_water;
                    step_inj[k] += frac * sub_inj;
                    for w in 0..nw {
                        well_oil[w][k] += frac * per_well[2 * w];
                        well_water[w][k] += frac * per_well[2 * w + 1];
                    }
                });

                for c in 0..cells {
                    let sw = s[c] + dt * accum[c] / self.pore_volume[c];
                    if !sw.is_finite() {
                        return Err(SimError::Breakdown {
                            time: t_next,
                            reason: format!("non-finite saturation in cell {c}"),
                        });
                    }
                    if sw < s_lo || sw > s_hi {
                        return Err(SimError::Defect {
                            time: t_next,
                            cell: c,
                            saturation: sw,
                        });
                    }
                    s[c] = sw;
                }
                substeps += 1;
                t = t_next;
            }
        }

        let steps = (0..n_steps)
            .map(|k| {
                let dt = edges[k + 1] - edges[k];
                StepRates {
                    dt,
                    t_end: edges[k + 1],
                    oil: step_oil[k] / dt,
                    water: step_water[k] / dt,
                    water_injected: step_inj[k] / dt,
                    gas: 0.0,
                }
            })
            .collect();
        let wells = self
            .model
            .wells
            .iter()
            .enumerate()
            .filter(|(_, w)| w.kind == WellKind::Producer)
            .map(|(w, well)| WellRates {
                name: well.name.clone(),
                oil: (0..n_steps).map(|k| well_oil[w][k] / (edges[k + 1] - edges[k])).collect(),
                water: (0..n_steps).map(|k| well_water[w][k] / (edges[k + 1] - edges[k])).collect(),
            })
            .collect();
        Ok(SimulationOutput {
            profile: ProductionProfile { steps, wells },
            cumulative: cum,
            pressure: p,
            saturation: s,
            stored_water,
            pressure_steps: times.len() - 1,
            substeps,
        })
    }

    /// Chord slope of the fractional flow between two saturations.
    fn secant(&self, s_up: f64, s_down: f64, df: f64) -> f64 {
        let ds = s_up - s_down;
        if ds.abs() > 1e-10 {
            df / ds
        } else {
            self.fluid.fractional_flow_slope(s_down)
        }
    }
}

/// Calls `emit(k, fraction)` for each control step `k` overlapping `[t0, t1]`.
fn distribute(edges: &[f64], t0: f64, t1: f64, mut emit: impl FnMut(usize, f64)) {
    let len = t1 - t0;
    if len <= 0.0 {
        return;
    }
    let last = edges.len() - 2;
    let mut k = edges.partition_point(|e| *e <= t0).saturating_sub(1).min(last);
    loop {
        let hi = edges[k + 1];
        if t1 <= hi || k == last {
            let lo = t0.max(edges[k]);
            emit(k, (t1 - lo) / len);
            return;
        }
        let lo = t0.max(edges[k]);
        emit(k, (hi - lo) / len);
        k += 1;
    }
}

pub fn simulate(model: &ReservoirModel, fluid: &FluidRock, schedule: &ControlSchedule) -> Result<SimulationOutput> {
    Simulator::new(model.clone(), fluid.clone(), SimOptions::default())?.run(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribute_inside_one_step() {
        let edges = [0.0, 10.0, 20.0];
        let mut got = vec![];
        distribute(&edges, 2.0, 5.0, |k, f| got.push((k, f)));
        assert_eq!(got, vec![(0, 1.0)]);
    }

    #[test]
    fn distribute_across_edges() {
        let edges = [0.0, 10.0, 20.0, 30.0];
        let mut got = vec![];
        distribute(&edges, 5.0, 25.0, |k, f| got.push((k, f)));
        assert_eq!(got, vec![(0, 0.25), (1, 0.5), (2, 0.25)]);
    }

    #[test]
    fn distribute_on_edge() {
        let edges = [0.0, 10.0, 20.0];
        let mut got = vec![];
        distribute(&edges, 10.0, 20.0, |k, f| got.push((k, f)));
        assert_eq!(got, vec![(1, 1.0)]);
    }

    #[test]
    fn time_grid_adds_rate_changes() {
        let case = crate::model::build_model1_desk();
        let sim = Simulator::new(case.model, case.fluid, SimOptions::default()).unwrap();
        let flat = ControlSchedule::constant(&[20.0; 4], 32, 720.0).unwrap();
        let base = sim.time_grid(&flat);
        assert_eq!(base.len(), 73);
        let mut v = vec![20.0; 128];
        v[1] = 30.0;
        let grid = sim.time_grid(&ControlSchedule::new(4, 32, v, 720.0).unwrap());
        assert_eq!(grid.len(), 75);
        assert!(grid.contains(&22.5) && grid.contains(&45.0));
    }
}
