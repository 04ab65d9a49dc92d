use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("operation needs a {expected} domain")]
    UnsupportedDimension { expected: &'static str },

    #[error("arclength {s} is within {tol} of a polygon corner; the normal is undefined")]
    Corner { s: f64, tol: f64 },

    #[error("point ({x}, {y}) is not strictly inside the domain")]
    DomainMembership { x: f64, y: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("backend {backend} does not support {what}; supported: {supported}")]
    BackendUnavailable {
        backend: &'static str,
        what: String,
        supported: String,
    },

    #[error("series truncated too early at t = {t}: tail bound {bound:.3e} exceeds {tol:.1e}; need lambda_max >= {required_lambda_max:.6e}")]
    Truncation {
        t: f64,
        bound: f64,
        tol: f64,
        required_lambda_max: f64,
    },

    #[error("fit window error: {0}")]
    Window(String),

    #[error("residual is below the noise floor; attainable delta_sq is at most {upper_bound:.6e}")]
    SignalTooSmall { upper_bound: f64 },

    #[error("insufficient t-range for extrapolation: {0}")]
    InsufficientRange(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    Argument(String),
}
