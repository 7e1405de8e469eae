use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Tripled coordinates are not all congruent modulo 3.
    #[error("invalid class: tripled coordinates {t:?} are not all congruent modulo 3")]
    InvalidClass { t: [i64; 10] },

    #[error("parse error at byte {pos}: expected {expected}, found {found}")]
    Parse {
        pos: usize,
        expected: String,
        found: String,
    },

    #[error("the zero class is not allowed here")]
    ZeroClass,

    #[error("lattice is not negative definite ({0})")]
    NotDefinite(String),

    #[error("target norm {n} is positive; a negative definite lattice has no such vectors")]
    TargetPositive { n: i64 },

    #[error("input {n} is negative")]
    NegativeInput { n: i64 },

    #[error("polarization must have positive square, got H^2 = {square}")]
    NonpositiveSquare { square: i64 },

    #[error("rank must be positive")]
    ZeroRank,

    #[error("coefficients must sum to zero, got {sum}")]
    NonzeroSum { sum: i64 },

    #[error("monomial exponents ({i},{j},{k}) are not tau-invariant or out of range")]
    NonInvariantMonomial { i: i64, j: i64, k: i64 },

    #[error("modulus {q} must be a prime not exceeding 31")]
    InvalidModulus { q: u64 },

    #[error("coordinate {value} exceeds the magnitude limit {limit}")]
    Overflow { value: i128, limit: i128 },

    #[error("{class} is not an Ulrich line class for Delta")]
    NotUlrich { class: String },

    #[error("chain stuck at rank {rank}: no partner with positive ext1 (c1 = {c1})")]
    ChainStuck { rank: u32, c1: String },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Stable short name, used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidClass { .. } => "invalid-class",
            Error::Parse { .. } => "parse",
            Error::ZeroClass => "zero-class",
            Error::NotDefinite(_) => "not-definite",
            Error::TargetPositive { .. } => "target-positive",
            Error::NegativeInput { .. } => "negative-input",
            Error::NonpositiveSquare { .. } => "nonpositive-square",
            Error::ZeroRank => "zero-rank",
            Error::NonzeroSum { .. } => "nonzero-sum",
            Error::NonInvariantMonomial { .. } => "non-invariant-monomial",
            Error::InvalidModulus { .. } => "invalid-modulus",
            Error::Overflow { .. } => "overflow",
            Error::NotUlrich { .. } => "not-ulrich",
            Error::ChainStuck { .. } => "chain-stuck",
            Error::Internal(_) => "internal",
        }
    }
}
