use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("homogeneous pair (0, 0) does not represent a point of the Riemann sphere")]
    ZeroPair,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid half-width {half_width} is smaller than the required {required}")]
    GridTooSmall { half_width: f64, required: f64 },
    #[error("degree is unreliable: raw value {raw} is {gap} away from the nearest integer")]
    UnreliableDegree { raw: f64, gap: f64 },
    #[error("line search failed: step fell below {min_step} without sufficient decrease")]
    LineSearchFailed { min_step: f64 },
    #[error("wrong topological sector: expected degree {expected}, found {found}")]
    WrongSector { expected: i64, found: i64 },
    #[error("degree left the sector after {iterations} iterations")]
    DegreeLost { iterations: usize },
    #[error("Dirichlet density vanishes; no vortex to locate")]
    DegenerateDensity,
    #[error("Möbius fit did not converge within {iterations} simplex iterations")]
    FitNotConverged { iterations: usize },
    #[error("ill-conditioned fit: {0}")]
    FitIllConditioned(String),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
