use thiserror::Error;

/// Errors raised anywhere in the simulation toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix of dimension {matrix} does not act on {targets} target qubit(s)")]
    DimensionMismatch { matrix: usize, targets: usize },
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("qubit {0} appears more than once in the target list")]
    DuplicateTarget(usize),
    #[error("qubit {qubit} is out of range for a register of width {width}")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("operation requires a {0} state")]
    WrongStateKind(&'static str),
    #[error("channel probabilities sum to {0}, expected 1")]
    ProbabilitiesNotNormalised(f64),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("state is corrupted: every measurement outcome has vanishing probability")]
    CorruptedState,
    #[error("width mismatch: expected {expected} qubits, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("{kind} simulation of {width} qubits exceeds the cap of {cap}; use Monte Carlo mode")]
    WidthCap {
        kind: &'static str,
        width: usize,
        cap: usize,
    },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("at least {min} copies are required, got {n}")]
    TooFewCopies { n: usize, min: usize },
    #[error("event {0} carries no duration")]
    MissingDuration(usize),
    #[error("no measurement outcome recorded for qubit {0}")]
    MissingBit(usize),
    #[error("no link between nodes {0} and {1}")]
    NoLink(usize, usize),
    #[error("nodes {0:?} are not linked along a path")]
    NotPathLinked(Vec<usize>),
    #[error("denominator {0:.3e} is too small for a stable ratio")]
    VanishingDenominator(f64),
    #[error("sample count {0} is not a positive multiple of 100")]
    InvalidSampleCount(usize),
    #[error("batch {0} has a zero denominator mean")]
    ZeroDenominatorBatch(usize),
    #[error("need at least {needed} points spanning one decade, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("unbounded Trotter budget: two-qubit error probability is zero")]
    UnboundedBudget,
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
