//! Derivative-free optimization for bound-constrained black-box
//! maximization: generalized pattern search, particle swarm, CMA-ES, and a
//! successive-splitting multiscale driver for piecewise-constant controls.
//!
//! All optimizers search the unit box and evaluate through an
//! [`Objective`], recording every call in an [`EvaluationLog`].

pub mod bounds;
pub mod cmaes;
pub mod driver;
pub mod error;
pub mod gps;
pub mod log;
pub mod multiscale;
pub mod objective;
pub mod pso;
pub mod rng;
pub mod schedule;
pub mod solver;

pub use bounds::Bounds;
pub use driver::{drive, IterationReport, RunOutcome, Strategy, Termination};
pub use error::{CoreError, EvalError, Result};
pub use log::{best_so_far_curve, evaluate_batch, EvaluationLog, LogEntry};
pub use multiscale::{run_multiscale, MultiscaleConfig, MultiscaleOutcome, ScaleResult};
pub use objective::{FnObjective, Objective, ObjectiveFamily};
pub use rng::{seeded, trial_seed, Rng};
pub use schedule::{split_values, ControlSchedule};
pub use solver::SolverConfig;
