use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported for this game: {0}")]
    Mode(String),

    #[error("no grid fixed point at t={t}, beliefs={beliefs:?}, z={z:?}")]
    NoEquilibrium {
        t: u32,
        beliefs: Vec<Vec<f64>>,
        z: Vec<f64>,
    },

    #[error("no value available at t={t}, beliefs={beliefs:?}, z={z:?}")]
    MissingPoint {
        t: u32,
        beliefs: Vec<Vec<f64>>,
        z: Vec<f64>,
    },

    #[error("enumeration budget exceeded: {needed} > {budget}")]
    Budget { needed: u128, budget: u128 },

    #[error("value iteration did not converge after {iterations} sweeps (last residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        residuals: Vec<f64>,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}
