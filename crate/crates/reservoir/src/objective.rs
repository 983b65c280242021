//! Waterflood NPV as a black-box objective over producer rates.

use std::sync::Arc;

use wellopt_core::{Bounds, ControlSchedule, CoreError, EvalError, Objective, ObjectiveFamily};

use crate::economics::{npv, EconomicParams};
use crate::error::Result;
use crate::model::WaterfloodCase;
use crate::simulate::{SimOptions, SimulationOutput, Simulator};

/// NPV of a well-major rate vector with a fixed number of steps per well.
pub struct WaterfloodObjective {
    sim: Arc<Simulator>,
    economics: EconomicParams,
    bounds: Bounds,
    steps_per_well: usize,
}

impl WaterfloodObjective {
    pub fn new(case: &WaterfloodCase, options: SimOptions, steps_per_well: usize) -> Result<Self> {
        let sim = Simulator::new(case.model.clone(), case.fluid.clone(), options)?;
        Self::with_simulator(Arc::new(sim), case, steps_per_well)
    }

    fn with_simulator(sim: Arc<Simulator>, case: &WaterfloodCase, steps_per_well: usize) -> Result<Self> {
        case.economics.validate()?;
        Ok(Self {
            bounds: case.bounds(steps_per_well)?,
            economics: case.economics.clone(),
            sim,
            steps_per_well,
        })
    }

    pub fn schedule(&self, x: &[f64]) -> Result<ControlSchedule> {
        let wells = self.bounds.dim() / self.steps_per_well;
        Ok(ControlSchedule::new(wells, self.steps_per_well, x.to_vec(), self.sim.model().horizon)?)
    }

    pub fn simulate(&self, x: &[f64]) -> Result<SimulationOutput> {
        self.sim.run(&self.schedule(x)?)
    }

    pub fn npv(&self, x: &[f64]) -> Result<f64> {
        Ok(npv(&self.simulate(x)?.profile, &self.economics))
    }
}

impl Objective for WaterfloodObjective {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, EvalError> {
        self.npv(x).map_err(|e| EvalError::new(e.to_string()))
    }
}

/// One simulator shared by objectives at every control resolution.
pub struct WaterfloodFamily {
    sim: Arc<Simulator>,
    case: WaterfloodCase,
}

impl WaterfloodFamily {
    pub fn new(case: WaterfloodCase, options: SimOptions) -> Result<Self> {
        case.validate()?;
        let sim = Simulator::new(case.model.clone(), case.fluid.clone(), options)?;
        Ok(Self {
            sim: Arc::new(sim),
            case,
        })
    }

    pub fn case(&self) -> &WaterfloodCase {
        &self.case
    }

    pub fn objective_at(&self, steps_per_well: usize) -> Result<WaterfloodObjective> {
        WaterfloodObjective::with_simulator(self.sim.clone(), &self.case, steps_per_well)
    }
}

impl ObjectiveFamily for WaterfloodFamily {
    fn wells(&self) -> usize {
        self.case.controlled_count()
    }

    fn objective(&self, steps_per_well: usize) -> wellopt_core::Result<Box<dyn Objective>> {
        self.objective_at(steps_per_well)
            .map(|o| Box::new(o) as Box<dyn Objective>)
            .map_err(|e| CoreError::Usage(e.to_string()))
    }
}
