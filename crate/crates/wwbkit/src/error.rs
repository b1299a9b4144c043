//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by geometry construction, bound evaluation, scenario
/// parsing and the CLI front end.
#[derive(Debug, Error)]
pub enum WwbError {
    /// Invalid array geometry (empty, non-finite coordinates, ...).
    #[error("geometry: {0}")]
    Geometry(String),

    /// Invalid signal model parameters or model/operation mismatch.
    #[error("model: {0}")]
    Model(String),

    /// Invalid prior specification.
    #[error("prior: {0}")]
    Prior(String),

    /// Parameter vector does not match the geometry kind.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The combined precision matrix of a likelihood-ratio moment is not
    /// positive definite; the requested (alpha, beta, u, v) point has no
    /// finite moment.
    #[error("invalid region: {0}")]
    InvalidRegion(String),

    /// A G matrix is singular or too ill-conditioned to invert.
    #[error("singular G matrix (condition estimate {cond:.3e})")]
    SingularG { cond: f64 },

    /// A denominator of a G element came out non-positive.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// Optimizer found no valid grid point.
    #[error("all {0} grid points were invalid")]
    EmptySearch(usize),

    /// Scenario file violates the schema or an invariant.
    #[error("scenario `{path}`: {field}: {message}")]
    Scenario {
        path: String,
        field: String,
        message: String,
    },

    /// Unknown validation suite name.
    #[error("unknown validation suite `{0}`")]
    UnknownSuite(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, WwbError>;
