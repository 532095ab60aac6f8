use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("out of domain: {0}")]
    Domain(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("incompatible boundary current: net flux {imbalance:e}")]
    Compatibility { imbalance: f64 },
    #[error("lambda = {lambda} is (near) a characteristic value: {detail}")]
    Characteristic { lambda: f64, detail: String },
    #[error("target {target:e} outside attainable range [{lo:e}, {hi:e}]")]
    Unattainable { target: f64, lo: f64, hi: f64 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Coarse classification used for process exit codes.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::Characteristic { .. } | Error::Unattainable { .. }
        )
    }
}
