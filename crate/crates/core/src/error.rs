use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("{what} = {value} outside {min}..={max}")]
    OutOfRange {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("phase undefined at a critical point: dispersion touches zero near k = {k}")]
    CriticalPoint { k: f64 },

    #[error("Pfaffian needs an even dimension, got {0}")]
    OddDimension(usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("correlator {kind} at distance {n} has imaginary part {imag:e}")]
    ImaginaryCorrelator { kind: &'static str, n: usize, imag: f64 },

    #[error("truncation tail bound {bound:e} exceeds {limit:e} at radius {radius}; increase the radius")]
    TailBound { radius: usize, bound: f64, limit: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("ground state is degenerate; comparison declined")]
    Degenerate,

    #[error("{0}")]
    Refused(String),
}

pub type Result<T> = core::result::Result<T, Error>;
