use thiserror::Error;

use crate::weyl::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("Weyl tensor failed validation: {0}")]
    Validation(ValidationReport),

    #[error("irreducible parts violate their invariants: {0}")]
    InvalidParts(String),

    #[error("inconsistent decomposition: {0}")]
    Inconsistent(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("step size underflow at r = {r:e} (h = {step:e} in ln r)")]
    Stiffness { r: f64, step: f64 },

    #[error("exponent fit needs at least {needed} usable samples, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("optical matrix became singular (caustic) near r = {r:e}")]
    Caustic { r: f64 },

    #[error("upstream data does not cover r = {r:e} (available [{lo:e}, {hi:e}])")]
    CoverageGap { r: f64, lo: f64, hi: f64 },

    #[error("stage mismatch: {0}")]
    Stage(String),

    #[error("integration diverged at r = {r:e}")]
    Divergence { r: f64 },

    #[error("internal invariant broken: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
