use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("quadrature did not converge: estimate {estimate}, change {delta} between resolutions")]
    NotConverged { estimate: f64, delta: f64 },

    #[error("unstable system: utilization {utilization} >= 1")]
    Unstable { utilization: f64 },

    #[error("law cannot be sampled: {0}")]
    NotSamplable(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
