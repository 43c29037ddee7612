use crate::model::ValidationReport;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("model validation failed:\n{0}")]
    InvalidModel(ValidationReport),

    #[error("{0}")]
    InvalidInput(String),

    #[error("matrix is singular to working precision (rcond estimate {rcond:.3e})")]
    SingularMatrix { rcond: f64 },

    #[error("QR eigenvalue iteration did not converge at index {index} after {iterations} sweeps")]
    EigenNonConvergence { index: usize, iterations: usize },

    #[error("matrix exponential overflowed (input 1-norm {norm:.6e}); the system is explosive at this horizon")]
    ExpOverflow { norm: f64 },

    #[error("ODE integrator step size underflow at t = {t:.6e}")]
    StepSizeUnderflow { t: f64 },

    #[error("stationary analysis refused: spectral abscissa omega = {omega:.9e} >= 0 (system not ergodic)")]
    UnstableSystem { omega: f64 },

    #[error("population overflow in replication {replication}: queue {queue} exceeded 2^31 (explosive model)")]
    PopulationOverflow { replication: u64, queue: usize },

    #[error("truncated state space too large: {states} states (caps: N <= {max_queues}, C <= {max_level}, I <= {max_env})")]
    TruncationTooLarge {
        states: usize,
        max_queues: usize,
        max_level: usize,
        max_env: usize,
    },

    #[error("closed form outside its validity regime: eta = {eta:.6e} <= 0")]
    ClosedFormInvalid { eta: f64 },

    #[error("nothing to count: departure flow from queue {queue} to outside is zero in every environment state")]
    NothingToCount { queue: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("model file parse error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
