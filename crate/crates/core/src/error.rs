use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("radius {r} lies inside the field-free shell of radius {shell}")]
    SingularShell { r: f64, shell: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("indefinite metric: radicand {radicand} < 0 at {location}")]
    IndefiniteMetric { radicand: f64, location: String },

    #[error("quadrature error bound {bound:e} exceeds tolerance {tolerance:e}")]
    QuadratureFailure { bound: f64, tolerance: f64 },

    #[error("no convergence after {iterations} iterations (gradient max-norm {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("iterate left the density domain at element {element} (slope {slope})")]
    DomainViolation { element: usize, slope: f64 },

    #[error("CFL ratio {ratio} exceeds {limit}")]
    CflViolation { ratio: f64, limit: f64 },

    #[error("blowup: |field| = {value:e} at step {step}")]
    Blowup { step: usize, value: f64 },

    #[error("length element {value} is not positive: momenta undefined")]
    NullOrSpacelike { value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
