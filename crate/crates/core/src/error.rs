use num_complex::Complex64;
use thiserror::Error;

/// Errors raised across the crate.
///
/// Poles are always reported as [`Error::PoleEncountered`], never as NaN or
/// infinity, so residue logic can tell a genuine pole apart from overflow.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pole encountered at s = {at}")]
    PoleEncountered { at: Complex64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid power r: {0}")]
    InvalidPower(String),

    #[error("lattice enumeration would visit ~{estimated} points, budget is {budget}")]
    CutoffTooLarge { estimated: f64, budget: u64 },

    #[error("eigensum needs ~{estimated} lattice points for the requested tolerance, budget is {budget}")]
    BudgetExceeded { estimated: f64, budget: u64 },

    #[error("contour abscissa tau = {tau} must exceed n/(2r) = {min}")]
    AbscissaTooSmall { tau: f64, min: f64 },

    #[error("contour too short: endpoint integrand {endpoint:e} at half-length {half_length}")]
    ContourTooShort { endpoint: f64, half_length: f64 },

    #[error("points coincide; the off-diagonal kernel is undefined on the diagonal")]
    OnDiagonal,

    #[error("Laurent coefficients disagree between radii: {difference:e}")]
    InconsistentLaurent { difference: f64 },

    #[error("design matrix is ill-conditioned (cond = {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("template mismatch: {0}")]
    TemplateMismatch(String),

    #[error("quadrature stalled: estimated error {estimate:e} above tolerance {tol:e}")]
    QuadratureFailure { estimate: f64, tol: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
