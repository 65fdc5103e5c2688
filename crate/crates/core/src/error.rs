use thiserror::Error;

/// Errors raised by densities, pricers and the simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("degenerate correlation {0}: |rho| < 1 is required")]
    DegenerateCorrelation(f64),

    #[error(
        "mirror average undefined at x = {x}, xbar = {xbar}: \
         square-root argument {discriminant} is negative"
    )]
    MirrorDomain {
        x: f64,
        xbar: f64,
        discriminant: f64,
    },

    #[error("point y = {y} lies above the barrier y_B = {barrier}")]
    AboveBarrier { y: f64, barrier: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
