//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised while parsing an expression string.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at offset {pos}: {message}")]
pub struct ParseError {
    /// Byte offset into the input where the error was detected.
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: usize, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

/// Errors raised during numeric evaluation of an expression.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("point has {got} coordinates, chart expects {expected}")]
    PointDim { expected: usize, got: usize },
    #[error("no binding for opaque symbol '{0}'")]
    MissingBinding(String),
    #[error("no value for parameter '{0}'")]
    MissingParam(String),
    #[error("binding for '{name}' does not support derivative order {order}")]
    UnsupportedOrder { name: String, order: u32 },
    #[error("evaluation produced a non-finite value")]
    NonFinite,
}

/// Errors raised while constructing a chart.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ChartError {
    #[error("chart needs at least 2 coordinates, got {0}")]
    TooFewCoords(usize),
    #[error("duplicate coordinate name '{0}'")]
    DuplicateCoord(String),
    #[error("'{0}' is not a valid coordinate identifier")]
    BadCoordName(String),
    #[error("interval for '{name}' is empty or not finite")]
    BadInterval { name: String },
    #[error("guard expression references {0}, which is not a chart coordinate")]
    GuardNotCoordinate(String),
}

/// Errors raised by the geometric operations and checkers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("operands live on different charts")]
    ChartMismatch,
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("expected multivector of degree {expected}, got {got}")]
    Degree { expected: usize, got: usize },
    #[error("interior product needs degree >= 1")]
    InteriorDegreeZero,
    #[error("coefficient list has {got} entries for a basis of {expected}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("structure coefficient {0} is required but absent")]
    MissingCoefficient(&'static str),
    #[error("no valid sample point found after {tries} rejections (guards too restrictive)")]
    Sampling { tries: usize },
    #[error("denominator X2(dH) vanishes on the sampled domain (|value| = {min_abs:.3e} at {point:?})")]
    DivisionDomain { min_abs: f64, point: Vec<f64> },
    #[error("invariance precondition failed: {what} is nonzero (residual {residual:.3e} at {witness:?})")]
    Invariance {
        what: String,
        residual: f64,
        witness: Vec<f64>,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T> = std::result::Result<T, Error>;
