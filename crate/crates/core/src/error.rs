use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("negative input {0} where a nonnegative integer is required")]
    Negative(BigInt),
    #[error("{0} is not prime")]
    NotPrime(BigInt),
    #[error("{0} is not a prime power")]
    NotPrimePower(BigInt),
    #[error("{0} is a perfect square")]
    PerfectSquare(BigInt),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("criterion inapplicable: {0}")]
    Inapplicable(String),
    #[error("polynomial has zero discriminant")]
    ZeroDiscriminant,
    #[error("f(1) = 0, the shifted polynomial is degenerate")]
    DegenerateShift,
    #[error("polygon spans differ ({0} vs {1})")]
    SpanMismatch(i64, i64),
    #[error("group order {shape} does not match f(1) = {f1}")]
    OrderMismatch { shape: BigInt, f1: BigInt },
    #[error("exceptional case {case} does not apply to q = {q}")]
    CaseMismatch { case: &'static str, q: BigInt },
    #[error("box of {size} points exceeds the cap of {cap}")]
    BoxTooLarge { size: BigInt, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
