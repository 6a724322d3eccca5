use thiserror::Error;

/// Errors produced by kinematics, metric, and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("module parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("tilt {theta:.6} rad exceeds the module limit of {max:.6} rad")]
    TiltOutOfRange { theta: f64, max: f64 },

    #[error("configuration has {got} coordinates but the model has {expected} degrees of freedom")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("weighted Jacobian is singular: smallest squared singular value {sigma_sq:.3e} is at or below the floor {floor:.3e}")]
    SingularJacobian { sigma_sq: f64, floor: f64 },

    #[error("degenerate metric input: {0}")]
    DegenerateInput(String),

    #[error("metric weights must be non-negative and sum to one, got {lambda1} and {lambda2}")]
    BadWeights { lambda1: f64, lambda2: f64 },

    #[error("action contains no tasks")]
    NoTasks,

    #[error("non-finite Jacobian entry in task '{task}'")]
    NonFiniteJacobian { task: String },

    #[error("unknown trajectory id {0}, expected 1 through 4")]
    BadTrajectoryId(u8),

    #[error("no run records to summarize")]
    EmptyInput,
}

pub type Result<T> = std::result::Result<T, Error>;
