use thiserror::Error;

/// Errors raised by the arithmetic, character and L-value routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{n} is not squarefree ({p}^2 divides it)")]
    NotSquarefree { n: u64, p: u64 },

    #[error("{a} is not invertible modulo {m}")]
    NotCoprime { a: i64, m: u64 },

    #[error("modulus must be positive")]
    ZeroModulus,

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("{q} is not {y}-smooth")]
    NotSmooth { q: u64, y: u64 },

    #[error("threshold V = {v} does not exceed q^delta = {bound}")]
    ThresholdTooSmall { v: f64, bound: f64 },

    #[error("no factorization of {q}: {detail}")]
    NoFactorization { q: u64, detail: String },

    #[error("characters have different moduli ({0} vs {1})")]
    ModulusMismatch(u64, u64),

    #[error("{r} does not divide {q}")]
    NotADivisor { r: u64, q: u64 },

    #[error("character {0} is not primitive")]
    NotPrimitive(String),

    #[error("modulus {0} is not prime")]
    NotPrime(u64),

    #[error("invalid character: {0}")]
    InvalidCharacter(String),

    #[error("Hurwitz zeta has a pole at s = 1")]
    PoleAtOne,

    #[error("bad split {q1} * {q2} of {q}")]
    BadSplit { q: u64, q1: u64, q2: u64 },

    #[error("empty family")]
    EmptyFamily,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
