use thiserror::Error;

/// Errors raised by the numerical routines and the CLI front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow while evaluating {what}: {detail}")]
    Overflow { what: &'static str, detail: String },

    #[error("quadrature did not reach tolerance {requested:e} (achieved estimate {achieved:e})")]
    ToleranceNotMet { requested: f64, achieved: f64 },

    /// The angular operator violates the hypothesis `μ₁ ≥ 0`.
    #[error("model rejected: lowest angular eigenvalue μ₁ = {mu1} < 0 (the decay theorems assume that μ₁(A,a) ≥ 0){}",
        if *.hardy_admissible { "; the form is still positive (μ₁ > -(n-2)²/4)" } else { "" })]
    ModelRejected { mu1: f64, hardy_admissible: bool },

    #[error("Galerkin resolution failure: eigenvalue shift {shift:e} between basis sizes {m} and {m2} exceeds {tol:e}")]
    Resolution { shift: f64, m: usize, m2: usize, tol: f64 },

    #[error("not enough eigenpairs to certify the series tail: bound {achieved:e} > tol {tol:e} with {available} pairs")]
    InsufficientEigenpairs { achieved: f64, tol: f64, available: usize },

    #[error("point product |x||y| = {z} lies outside the certified range z <= {z_max}")]
    OutOfCertificate { z: f64, z_max: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
