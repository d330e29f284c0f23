use alloc::string::String;

use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("parse error in `{field}`: {source}")]
    Parse { field: String, source: ParseError },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("no bracket for {what} at t={t}, x={x}")]
    Bracket { what: &'static str, t: f64, x: f64 },
    #[error("hodograph collapse (mu = nu) at t={t}, x={x}")]
    Collapse { t: f64, x: f64 },
    #[error("hodograph inversion failed at t={t}, x={x}: {source}")]
    Hodograph { t: f64, x: f64, source: NumericsError },
    #[error("lambda = {lambda} outside [{lo}, {hi}]")]
    OutOfRange { lambda: f64, lo: f64, hi: f64 },
    #[error("lambda_g changes sign at t={t}, x={x}")]
    NonMonotone { t: f64, x: f64 },
    #[error("G changes sign between nu and -v at t={t}, x={x}")]
    SignChange { t: f64, x: f64 },
    #[error("(t={t}, x={x}) is outside the validity domain")]
    Invalid { t: f64, x: f64 },
    #[error("y = {y} is beyond the column depth {depth}")]
    DepthExceeded { y: f64, depth: f64 },
    #[error("{masked} of {total} points failed")]
    TooManyMasked { masked: usize, total: usize },
    #[error("{dropped} of {total} samples left the box")]
    TooManyDropped { dropped: usize, total: usize },
    #[error("sign resolution is degenerate: {count} conventions converge")]
    DegenerateSigns { count: usize },
    #[error("no sign convention converges")]
    NoConvention,
    #[error("grid too small: {0}")]
    GridTooSmall(&'static str),
    #[error("too few matched pairs: {found} < {needed}")]
    TooFewMatches { found: usize, needed: usize },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
}

impl Error {
    pub(crate) fn parse(field: &str, source: ParseError) -> Self {
        Self::Parse { field: field.into(), source }
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Self::InvalidParameter { field, reason: reason.into() }
    }
}
