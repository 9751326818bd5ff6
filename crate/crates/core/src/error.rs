use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("grid too coarse: {0}")]
    Aliasing(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("kernel and domain do not match: {0}")]
    Mismatch(String),
    #[error("time step {dt} violates the CFL bound, use dt <= {suggested}")]
    Cfl { dt: f64, suggested: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
