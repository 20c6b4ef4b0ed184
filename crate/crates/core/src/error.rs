use alloc::string::String;

/// Errors raised by model construction, simulation and pricing.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("tenor index {index} out of range (valid 0..={max})")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("non-positive bond price {value} at tenor index {index}")]
    NonPositiveBond { index: usize, value: f64 },

    #[error("argument {value} outside the exponential moment domain (bound {bound})")]
    MomentDomain { value: f64, bound: f64 },

    #[error(
        "u = {u} is outside the moment domain of the affine flow; maximal admissible u is {u_max}"
    )]
    FlowDomain { u: f64, u_max: f64 },

    #[error("time grid is empty")]
    EmptyGrid,

    #[error("time step {step} exceeds the maximal step {max}")]
    StepTooLarge { step: f64, max: f64 },

    #[error("scheme `{0}` is not supported for this driver")]
    UnsupportedScheme(&'static str),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("calibration failed at tenor date {date}: {reason}")]
    Calibration { date: usize, reason: String },

    #[error("root not bracketed in [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("curve fit infeasible at k = {k}: target ratio {target} exceeds attainable supremum {supremum}")]
    FitInfeasible {
        k: usize,
        target: f64,
        supremum: f64,
    },

    #[error("price {price} violates the {bound} arbitrage bound {value}")]
    PriceOutOfBounds {
        price: f64,
        bound: &'static str,
        value: f64,
    },

    #[error("path set carries no density weights")]
    MissingWeights,

    #[error("path set does not cover tenor date {0}")]
    DateNotCovered(usize),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
