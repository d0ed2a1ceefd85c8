use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("distribution level must be nonnegative, got {0}")]
    NegativeLevel(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("evaluation point {x} lies inside the doubled interval centered at {center} (length {length})")]
    InsideDoubledInterval { x: f64, center: f64, length: f64 },

    #[error("K-curve integrand has not decayed at the grid ends (T = {t_exp}, left {left:.3e}, right {right:.3e} of max)")]
    TailNotDecayed { t_exp: u32, left: f64, right: f64 },

    #[error("Dini integral diverges: omega does not decay at small delta (slope {slope:.3})")]
    DiniDivergent { slope: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
