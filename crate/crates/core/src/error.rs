use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("integrand is not finite at x = {abscissa}")]
    NonFinite { abscissa: f64 },

    #[error("integrand is not finite at sphere point (theta, phi) = ({theta}, {phi})")]
    NonFiniteOnSphere { theta: f64, phi: f64 },

    #[error("invalid quadrature specification: {0}")]
    InvalidQuadrature(String),

    #[error("POVM construction failed: {0}")]
    Construction(String),

    #[error("outcome density is negative ({value:e}) at phi_hat = {phi_hat}")]
    NegativeDensity { phi_hat: f64, value: f64 },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("unsupported direction: {0}")]
    UnsupportedDirection(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
