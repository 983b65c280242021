//! Two-phase waterflood simulation, the five-spot Model 1, NPV economics and
//! analytic test objectives.

pub mod analytic;
pub mod banded;
pub mod economics;
pub mod error;
pub mod external;
pub mod fluid;
pub mod model;
pub mod objective;
pub mod simulate;

pub use economics::{discounted_volumes, npv, EconomicParams, ProductionProfile, StepRates, WellRates};
pub use error::{Result, SimError};
pub use fluid::{fractional_flow, FluidRock};
pub use model::{build_model1, build_model1_desk, Grid, PermeabilityField, ReservoirModel, WaterfloodCase, Well, WellKind};
pub use objective::{WaterfloodFamily, WaterfloodObjective};
pub use simulate::{simulate, Cumulative, SimOptions, SimulationOutput, Simulator};
