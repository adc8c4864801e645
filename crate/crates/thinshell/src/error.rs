use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pole singularity at s = {s}")]
    PoleSingularity { s: f64 },
    #[error("chart coordinates out of range: s = {s}, theta = {theta}")]
    ChartOutOfRange { s: f64, theta: f64 },
    #[error("point outside the tubular reach (jacobian {jacobian})")]
    OutsideReach { jacobian: f64 },
    #[error("grid mismatch: expected {expected:?}, found {found:?}")]
    GridMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("resolvent I - rW is numerically singular")]
    SingularResolvent,
    #[error("field is not tangential (residual {residual:.3e})")]
    NotTangential { residual: f64 },
    #[error("eigensolver failure: {0}")]
    EigSolverFailure(String),
    #[error("no convergence after {max_iter} iterations (residual {residual:.3e})")]
    NoConvergence { max_iter: usize, residual: f64 },
    #[error("weight must be positive (min {min})")]
    NonpositiveWeight { min: f64 },
    #[error("need at least {needed} radial nodes, got {n_r}")]
    TooFewRadialNodes { n_r: usize, needed: usize },
    #[error("invalid epsilon list: {0}")]
    InvalidEpsilonList(String),
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("CFL number {cfl:.3} exceeds bound {bound}")]
    CflViolation { cfl: f64, bound: f64 },
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("invalid thin domain: {0}")]
    InvalidDomain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("grid too coarse: refinement moved the result by {change:.2e} (tol {tol})")]
    UnderResolved { change: f64, tol: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
