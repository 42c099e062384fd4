//! Experiment harness and file formats on top of [`fillvol_core`].
//!
//! [`harness`] drives the scaling, concentration, and correlation
//! experiments; [`formats`] holds the JSON shapes read and written by the
//! `fillvol` binary; [`fit`] and [`stats`] are the small amount of
//! statistics the experiments need.

pub mod fit;
pub mod formats;
pub mod harness;
pub mod stats;

pub use fit::{fit_power_law, fit_sqrtlog, PowerFit, SqrtLogFit};
pub use harness::{ExperimentConfig, ExperimentKind, Model, Observable, Row, ScalingResult};

/// Errors surfaced by the lab. [`LabError::exit_code`] maps them onto the
/// command line contract: 2 for bad input, 3 for solver failures.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Solver(_) => 3,
            _ => 2,
        }
    }
}

impl From<fillvol_core::Error> for LabError {
    fn from(e: fillvol_core::Error) -> Self {
        use fillvol_core::Error as E;
        match e {
            E::InvalidArgument(_) | E::Structural(_) => LabError::Config(e.to_string()),
            E::DegenerateSlice(_) | E::Sampling { .. } | E::Solver(_) | E::Internal(_) => {
                LabError::Solver(e.to_string())
            }
        }
    }
}
