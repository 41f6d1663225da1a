use thiserror::Error;

/// Errors produced by the workbench.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("chain size must be at least 2, got {0}")]
    InvalidChain(usize),
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("element {value} out of range for chain of size {size}")]
    ElementOutOfRange { value: usize, size: usize },
    #[error("operations live on different chains ({left} vs {right})")]
    DomainMismatch { left: usize, right: usize },
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("tabulation needs {requested} entries, cap is {cap}")]
    BudgetExceeded { requested: u128, cap: u128 },
    #[error("index {k} out of range for arity {n}")]
    IndexOutOfRange { n: usize, k: usize },
    #[error("median needs an odd arity, got {0}")]
    EvenArity(usize),
    #[error("operation needs an even arity, got {0}")]
    OddArity(usize),
    #[error("parity violation: {0}")]
    ParityViolation(String),
    #[error("source operation is not a majority function")]
    NotAMajority,
    #[error("arity {found} too small, need at least {min}")]
    ArityTooSmall { min: usize, found: usize },
    #[error("{n} is not almost divisible by {k}")]
    NotAlmostDivisible { n: usize, k: usize },
    #[error("parameters outside the stated range: {0}")]
    OutOfStatedRange(String),
    #[error("tuple of length {0} is too short, need at least 3")]
    TupleTooShort(usize),
    #[error("symbol `{0}` is not a monotone order statistic")]
    NonMonotoneSymbol(String),
    #[error("sets {0:?} and {1:?} are disjoint")]
    NotPairwiseIntersecting(Vec<usize>, Vec<usize>),
    #[error("permutation search refused for arity {0} (limit 8)")]
    ArityTooLargeForSearch(usize),
    #[error("family is almost unary; no lower bound available")]
    AlmostUnary,
    #[error("family has no {0}-element member")]
    NoWildSetOfSize(usize),
    #[error("target arity {arity} exceeds the fragment's max arity {max}")]
    ArityOverBudget { arity: usize, max: usize },
    #[error("operation is a projection")]
    ProjectionGiven,
    #[error("family is not upward closed")]
    NotUpwardClosed,
    #[error("invalid variable map: {0}")]
    InvalidVarMap(String),
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
