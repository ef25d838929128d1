use thiserror::Error;

/// Errors raised by the algebra, series and descent layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0:?} is not irreducible over F_{1}")]
    Reducible(Vec<u32>, u32),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("degree cap exceeded: {0}")]
    DegreeCap(String),
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("valuation not certified at this precision")]
    ValuationUndecided,
    #[error("undecided at this precision: {0}")]
    Undecided(String),
    #[error("not a unit: {0}")]
    NotUnit(String),
    #[error("insufficient digit precision: need M >= {need}, have {have}")]
    DigitPrecision { need: u32, have: u32 },
    #[error("window underflow: {0}")]
    WindowUnderflow(String),
    #[error("subwindow too small: {0}")]
    Subwindow(String),
    #[error("compatibility failure: {0}")]
    Compatibility(String),
    #[error("dimension too large: {0}")]
    DimensionTooLarge(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not representable: {0}")]
    Unrepresentable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
