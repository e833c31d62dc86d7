use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension n = {0} is not supported (need n >= 2)")]
    Dimension(u32),

    #[error("inner radius lambda = {0} outside [{min}, {max}]", min = crate::radial::LAMBDA_MIN, max = crate::radial::LAMBDA_MAX)]
    InnerRadius(f64),

    #[error("radius r = {r} outside [{lambda}, 1]")]
    RadiusOutOfRange { r: f64, lambda: f64 },

    #[error("harmonic degree k = {0} must be finite and >= 0")]
    Degree(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("perturbation is not admissible: {0}")]
    Inadmissible(String),

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("no sign change of mu_(m,1) on [{lo}, {hi}] for n = {n}, m = {m}")]
    NoSignChange { n: u32, m: u32, lo: f64, hi: f64 },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
