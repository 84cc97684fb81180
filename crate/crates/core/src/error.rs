use thiserror::Error;

/// Errors produced by scenario validation, the replication kernels, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid market: {0}")]
    InvalidMarket(String),

    #[error("invalid account: {0}")]
    InvalidAccount(String),

    #[error("invalid gamma: {0}")]
    InvalidGamma(String),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("invalid quantity: {0}")]
    InvalidQuantity(String),

    /// R(s) has an empty integration interval; its inverse is unbounded.
    #[error("R(s) is singular at s = {s} (terminal time {t_final})")]
    SingularR { s: f64, t_final: f64 },

    #[error("quadrature did not converge within depth {max_depth}")]
    NoConvergence { max_depth: u32 },

    #[error("non-positive price {price} at step {step}")]
    NonPositivePrice { price: f64, step: usize },

    #[error("option expired: t = {t} is at or past maturity {t_final}")]
    ExpiredOption { t: f64, t_final: f64 },

    #[error("path grid (T={path_t}, N={path_n}) does not match scenario grid (T={scenario_t}, N={scenario_n})")]
    GridMismatch {
        path_t: f64,
        path_n: usize,
        scenario_t: f64,
        scenario_n: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown key `{key}`{context}")]
    UnknownKey { key: String, context: String },

    #[error("missing key `{key}`")]
    MissingKey { key: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
