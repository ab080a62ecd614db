use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("inadmissible cutoff: {0}")]
    InadmissibleCutoff(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("truncation leakage {leakage:.3e} exceeds bound {bound:.3e}; increase n_max")]
    Leakage { leakage: f64, bound: f64 },

    #[error("dimension overflow: {0} amplitudes exceeds cap {1}")]
    DimensionOverflow(usize, usize),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
