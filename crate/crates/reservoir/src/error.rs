use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("simulation breakdown at t = {time} days: {reason}")]
    Breakdown { time: f64, reason: String },

    #[error("saturation {saturation} in cell {cell} left its admissible range at t = {time} days")]
    Defect { time: f64, cell: usize, saturation: f64 },

    #[error("external simulator: {0}")]
    External(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Core(#[from] wellopt_core::CoreError),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
