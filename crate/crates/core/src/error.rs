use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bad configuration: {0}")]
    BadConfig(String),

    #[error("second derivative of the principal part is undefined at zero slope (kappa = 0, p < 2)")]
    DegeneratePoint,

    #[error("Hessian undefined on {} element(s) with zero slope (kappa = 0, p < 2)", elements.len())]
    DegenerateElement { elements: Vec<usize> },

    #[error("lambda = {lambda} lies on the spectrum (lambda_{index} = {eigenvalue})")]
    Resonant {
        lambda: f64,
        index: usize,
        eigenvalue: f64,
    },

    #[error("spectrum table with {len} values does not bracket lambda = {lambda}")]
    TableTooShort { lambda: f64, len: usize },

    #[error("zero pivot in symmetric factorization; perturb the tolerance and retry")]
    FactorizationBreakdown,

    #[error("eigensolver did not converge for eigenpair {index}")]
    ConvergenceFailure { index: usize },

    #[error("trajectory blew up (|u| > 1e8) at x = {x}")]
    BlowUp { x: f64 },

    #[error("could not bracket the target: {0}")]
    BracketFailure(String),

    #[error("no solution found: {0}")]
    NotFound(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    MaxIterExceeded { iterations: usize, residual: f64 },

    #[error("Hessian is singular even after regularization")]
    SingularHessian,

    #[error("mountain-pass path collapsed onto an endpoint")]
    PathCollapse,

    #[error("straight path has no barrier: endpoints are not below the path maximum")]
    NoBarrier,

    #[error("field is not a critical point (residual {residual:.3e})")]
    NotCritical { residual: f64 },

    #[error("Morse index is infinite; the reduction is not available in this regime")]
    InfiniteIndex,

    #[error("inner minimization failed: {0}")]
    SolverFailure(String),

    #[error("operation excluded in this regime: {0}")]
    RegimeExcluded(String),

    #[error("dimension {0} of V is too large for grid classification (max 2)")]
    DimTooHigh(usize),

    #[error("fields live on different meshes")]
    MeshMismatch,

    #[error("malformed field table: {0}")]
    BadField(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
