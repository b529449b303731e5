use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("coin amplitudes (0, 0) do not define a state")]
    NullCoin,
    #[error("coin amplitudes must be finite")]
    NonFiniteCoin,
    #[error("visibility {0} is outside [0, 1]")]
    InvalidVisibility(f64),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace {0} differs from 1")]
    BadTrace(f64),
    #[error("matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
}

/// The target field operation has no value at this input (0·∞ or ∞+∞),
/// so the heralding probability vanishes.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("indefinite outcome at critical point: {point}")]
pub struct Indefinite {
    pub point: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("expected {expected} data inputs, got {got}")]
    DataArity { expected: usize, got: usize },
    #[error("node {node}: {kind} takes {expected} inputs, got {got}")]
    NodeArity {
        node: usize,
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("node {node} references {wire} which does not exist or is not yet defined")]
    DanglingWire { node: usize, wire: String },
    #[error("wire {0} is consumed more than once")]
    WireReused(String),
    #[error("output of node {0} is never consumed")]
    UnusedNode(usize),
    #[error("circuit output references {0} which does not exist")]
    BadOutput(String),
    #[error("no closed form covers this circuit shape at V < 1: {0}")]
    NoClosedForm(String),
    #[error("template id {0} is not in 1..=8")]
    UnknownTemplate(u8),
    #[error("template needs parameter {0}")]
    MissingParameter(&'static str),
    #[error("parameter {0} must be finite")]
    NonFiniteParameter(&'static str),
    #[error("program_linear needs alpha != 0")]
    ZeroAlpha,
    #[error("the oracle supports at most 3 photons, circuit uses {0}")]
    TooManyPhotons(usize),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("rational function has an empty coefficient list")]
    Empty,
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("root finder did not converge after {iterations} iterations (max residual {max_residual:e})")]
    NoConvergence {
        iterations: usize,
        max_residual: f64,
        residuals: Vec<f64>,
    },
    #[error("coefficient must be finite")]
    NonFinite,
}
