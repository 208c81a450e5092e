use thiserror::Error;

use crate::catchup::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty constraint set: {0}")]
    EmptySet(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("step rule h·B ≤ r/2 violated for n = {n}; minimal admissible n is {min_n}")]
    StepRule { n: usize, min_n: usize },

    #[error("step {step} failed: {reason}")]
    StepFailed {
        step: usize,
        reason: Box<Error>,
        partial: Box<Trajectory>,
    },

    #[error("disks {i} and {j} have coincident centers")]
    CoincidentCenters { i: usize, j: usize },

    #[error("grid has no exit cell")]
    NoExit,

    #[error("position ({x}, {y}) is outside the grid")]
    OutsideGrid { x: f64, y: f64 },

    #[error("position ({x}, {y}) is not in a reachable free cell")]
    Unreachable { x: f64, y: f64 },

    #[error("scenario field `{field}`: {message}")]
    Scenario { field: String, message: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
