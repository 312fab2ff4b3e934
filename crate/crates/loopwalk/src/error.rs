use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid excursion at step {index}: {reason}")]
    InvalidExcursion { index: usize, reason: &'static str },

    #[error("generation exceeded the cap of {cap} vertices")]
    CapExceeded { cap: u64 },

    #[error("no tree of size {size} has positive probability under this law")]
    ImpossibleSize { size: usize },

    #[error(
        "conditioned sampler gave up after {attempts} attempts \
         (acceptance rate ~{rate:.2e})"
    )]
    AttemptsExhausted { attempts: u64, rate: f64 },

    #[error("ball radius {radius} too small: this operation needs radius >= {needed}")]
    RadiusTooSmall { radius: u64, needed: u64 },

    #[error(
        "solver stopped at relative residual {residual:.3e} after {iterations} \
         iterations (target {target:.1e})"
    )]
    NoConvergence {
        iterations: u64,
        residual: f64,
        target: f64,
    },

    #[error("fixed-point iteration did not converge within {iterations} iterations")]
    FixedPointDiverged { iterations: u64 },

    #[error("need at least {need} points for a fit, got {have}")]
    TooFewPoints { have: usize, need: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
