use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The normalized deficit is at or beyond `2/√(2π)`; there is no
    /// Gaussian-equivalent index. This is a diagnostic outcome.
    #[error("normalized deficit {0} is at or beyond the Gaussian endpoint 0.797884560803")]
    OutOfGaussianDomain(f64),

    #[error("no failures observed in {samples} samples; p_f < 1/{samples}")]
    NoFailuresObserved { samples: u64 },

    #[error("missing value for input `{0}`")]
    MissingInput(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid limit-state model: {0}")]
    InvalidModel(String),

    #[error("invalid simulation settings: {0}")]
    InvalidSimulation(String),

    #[error(
        "refusing to calibrate: target p_f {target_pf} with {samples} samples leaves fewer than 10 tail points"
    )]
    CalibrationTooDeep { target_pf: f64, samples: u64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
