use thiserror::Error;

/// Broad failure classes, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Geometry,
    Solver,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("component {component}: declared {declared} orientation but the curve runs {actual}")]
    Orientation {
        component: usize,
        declared: &'static str,
        actual: &'static str,
    },

    #[error("node count n = {0} must be even and at least 4")]
    NodeCount(usize),

    #[error("point {x}+{y}i is too close to boundary component {component} (indeterminate)")]
    NearBoundary { component: usize, x: f64, y: f64 },

    #[error("point {x}+{y}i is not in the field of the condenser")]
    OutsideField { x: f64, y: f64 },

    #[error("classification failed: {0}")]
    Classification(String),

    #[error("auxiliary point: {0}")]
    AuxiliaryPoint(String),

    #[error(
        "gamma_{k} is not periodic on component {component} (closure residual {residual:.3e})"
    )]
    Periodicity {
        k: usize,
        component: usize,
        residual: f64,
    },

    #[error("coincident boundary nodes on components {0} and {1}; lower n or the grading order")]
    CoincidentNodes(usize, usize),

    #[error("diagonal limit undefined at node {0} (vanishing derivative)")]
    DegenerateDerivative(usize),

    #[error(
        "GMRES did not converge in {iterations} iterations (relative residual {residual:.3e})"
    )]
    NotConverged { iterations: usize, residual: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::NotConverged { .. } | Error::Singular(_) => ErrorKind::Solver,
            _ => ErrorKind::Geometry,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Geometry => 3,
            ErrorKind::Solver => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
