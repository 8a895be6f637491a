use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("prime {0} does not fit the residue storage (max 251)")]
    PrimeTooLarge(u32),
    #[error("an algebra needs between 1 and {max} levels, got {got}")]
    LevelCount { got: usize, max: usize },
    #[error("the prime sequence {0:?} is not alternating")]
    NotAlternating(Vec<u32>),
    #[error("operation needs at least {need} levels, algebra has {have}")]
    TooFewLevels { need: usize, have: usize },
    #[error("elements belong to different algebras")]
    SpecMismatch,
    #[error("residue {value} out of range at level {level} (modulus {modulus})")]
    ResidueOutOfRange { level: usize, value: u32, modulus: u32 },
    #[error("level out of range: {level} not in {lo}..={hi}")]
    LevelOutOfRange { level: usize, lo: usize, hi: usize },
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("variable index {index} overflows arity {arity}")]
    VariableOverflow { index: usize, arity: usize },
    #[error("malformed element literal {0:?}")]
    BadLiteral(String),
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{what} exceeds ceiling: needs {needed}, ceiling {ceiling}")]
    Ceiling {
        what: &'static str,
        needed: u128,
        ceiling: u128,
    },
    #[error("part gadgets need arity {arity} at s = {s}, ceiling {max}")]
    GadgetTooWide { s: usize, arity: usize, max: usize },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("assignment is not a solution: {0}")]
    NotASolution(String),
    #[error("empty point set")]
    EmptySet,
}

impl Error {
    pub(crate) fn ceiling(what: &'static str, needed: u128, ceiling: u128) -> Self {
        Error::Ceiling {
            what,
            needed,
            ceiling,
        }
    }
}
