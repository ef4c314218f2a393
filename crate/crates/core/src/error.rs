use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("domain violation at x = {x}: {reason}")]
    Domain { x: f64, reason: String },
    #[error("non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },
    #[error("derivative order {order} requires at least {required} grid points, got {n}")]
    StencilGuard { order: usize, n: usize, required: usize },
    #[error("operator is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("eigensolver did not converge: {0}")]
    Convergence(String),
    #[error("particular Riccati solution fails: residual {0:e}")]
    ParticularSolution(f64),
    #[error("singular family: z vanishes near x = {x}")]
    SingularFamily { x: f64 },
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
    #[error("ladder check failed: residual {0:e}")]
    LadderCheck(f64),
    #[error("resonance condition violated: {0}")]
    Resonance(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degeneracy tolerance {tol:e} is below the eigenvalue accuracy {accuracy:e}")]
    DegeneracyTolerance { tol: f64, accuracy: f64 },
    #[error("multiplet at energy {0} is not fully resolved in the computed levels")]
    UnresolvedMultiplet(f64),
    #[error("Painleve integration stopped: {0}")]
    Painleve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
