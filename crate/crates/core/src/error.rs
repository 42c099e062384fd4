use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed combinatorial data (bad vertex index, wrong tuple length).
    #[error("structural error: {0}")]
    Structural(String),

    /// The slice parameter hit a measure-zero degeneracy; redraw and retry.
    #[error("degenerate slice: {0}")]
    DegenerateSlice(String),

    #[error("sampling failed after {attempts} attempts (acceptance rate {rate:.3e})")]
    Sampling { attempts: u64, rate: f64 },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
