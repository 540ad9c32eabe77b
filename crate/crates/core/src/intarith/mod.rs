//! Exact integer arithmetic: square roots, p-adic valuations, prime powers,
//! and small factorizations.
//!
//! Everything here works on [`BigInt`]; hot paths drop to `u64` when the
//! operands fit. No floating point is used in any decision.

mod padic;
mod surd;

pub use padic::{has_root_in_zp, is_square_in_zp};
pub use surd::{sqrt_dist, QuadraticSurd};

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Trial division never goes past this bound.
pub const TRIAL_DIVISION_LIMIT: u64 = 10_000_000;

/// `q = p^r` with `p` prime and `r >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimePower {
    q: BigInt,
    p: BigInt,
    r: u32,
}

impl PrimePower {
    pub fn new(q: impl Into<BigInt>) -> Result<Self> {
        is_prime_power(&q.into())
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn r_is_even(&self) -> bool {
        self.r.is_multiple_of(2)
    }

    /// `sqrt(q)` when `r` is even.
    pub fn exact_sqrt(&self) -> Option<BigInt> {
        self.r_is_even().then(|| num_traits::pow(self.p.clone(), (self.r / 2) as usize))
    }
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

/// p-adic valuation; `Infinite` is the valuation of zero and exceeds every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PAdicValuation {
    Finite(u64),
    Infinite,
}

impl PAdicValuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            PAdicValuation::Finite(v) => Some(v),
            PAdicValuation::Infinite => None,
        }
    }

    pub fn is_zero(self) -> bool {
        self == PAdicValuation::Finite(0)
    }

    /// `nu >= r/2`, evaluated as `2 nu >= r`.
    pub fn at_least_half_of(self, r: u32) -> bool {
        match self {
            PAdicValuation::Finite(v) => 2 * v >= r as u64,
            PAdicValuation::Infinite => true,
        }
    }

    pub fn at_least(self, r: u32) -> bool {
        match self {
            PAdicValuation::Finite(v) => v >= r as u64,
            PAdicValuation::Infinite => true,
        }
    }
}

impl std::ops::Add for PAdicValuation {
    type Output = PAdicValuation;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (PAdicValuation::Finite(a), PAdicValuation::Finite(b)) => PAdicValuation::Finite(a + b),
            _ => PAdicValuation::Infinite,
        }
    }
}

impl fmt::Display for PAdicValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PAdicValuation::Finite(v) => write!(f, "{v}"),
            PAdicValuation::Infinite => f.write_str("inf"),
        }
    }
}

/// Floor of the square root: `s^2 <= n < (s+1)^2`.
pub fn isqrt(n: &BigInt) -> Result<BigInt> {
    if n.is_negative() {
        return Err(Error::Negative(n.clone()));
    }
    Ok(n.sqrt())
}

/// Floor of the fourth root of a nonnegative integer.
pub fn iroot4(n: &BigInt) -> Result<BigInt> {
    if n.is_negative() {
        return Err(Error::Negative(n.clone()));
    }
    Ok(n.nth_root(4))
}

pub fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let s = n.sqrt();
    &s * &s == *n
}

/// Exact square root if `n` is a perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let s = n.sqrt();
    (&s * &s == *n).then_some(s)
}

/// `nu_p(n)`, rejecting composite `p`.
pub fn nu(p: &BigInt, n: &BigInt) -> Result<PAdicValuation> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p.clone()));
    }
    Ok(valuation(p, n))
}

/// Valuation without the primality check, for callers that already know `p` is prime.
pub(crate) fn valuation(p: &BigInt, n: &BigInt) -> PAdicValuation {
    if n.is_zero() {
        return PAdicValuation::Infinite;
    }
    if let (Some(p), Some(n)) = (p.to_u64(), n.abs().to_u64()) {
        let mut n = n;
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        return PAdicValuation::Finite(e);
    }
    let mut n = n.abs();
    let mut e = 0;
    loop {
        let (quo, rem) = n.div_rem(p);
        if !rem.is_zero() {
            break;
        }
        n = quo;
        e += 1;
    }
    PAdicValuation::Finite(e)
}

/// Strips every factor of `p` from `n`, returning `(exponent, cofactor)`.
pub(crate) fn split_off(p: &BigInt, n: &BigInt) -> (u64, BigInt) {
    let mut n = n.clone();
    let mut e = 0;
    if n.is_zero() {
        return (0, n);
    }
    loop {
        let (quo, rem) = n.div_rem(p);
        if !rem.is_zero() {
            return (e, n);
        }
        n = quo;
        e += 1;
    }
}

fn smallest_factor_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    if n.is_multiple_of(3) {
        return 3;
    }
    let mut d = 5u64;
    while d <= TRIAL_DIVISION_LIMIT && d * d <= n {
        if n.is_multiple_of(d) {
            return d;
        }
        if n.is_multiple_of(d + 2) {
            return d + 2;
        }
        d += 6;
    }
    n
}

fn smallest_factor_big(n: &BigInt) -> BigInt {
    if let Some(v) = n.to_u64() {
        return BigInt::from(smallest_factor_u64(v));
    }
    for d in [2u64, 3] {
        if (n % d).is_zero() {
            return BigInt::from(d);
        }
    }
    let mut d = 5u64;
    while d <= TRIAL_DIVISION_LIMIT {
        let dd = BigInt::from(d);
        if &dd * &dd > *n {
            return n.clone();
        }
        if (n % d).is_zero() {
            return dd;
        }
        if (n % (d + 2)).is_zero() {
            return BigInt::from(d + 2);
        }
        d += 6;
    }
    n.clone()
}

fn miller_rabin(n: &BigInt) -> bool {
    const BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
    let one = BigInt::one();
    let n_minus_1 = n - &one;
    let (s, d) = split_off(&BigInt::from(2), &n_minus_1);
    'bases: for a in BASES {
        let a = BigInt::from(a);
        if (&a % n).is_zero() {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Primality by trial division; past `TRIAL_DIVISION_LIMIT^2` the leftover
/// candidate is settled by Miller-Rabin on the first thirteen prime bases.
pub fn is_prime(n: &BigInt) -> bool {
    if *n < BigInt::from(2) {
        return false;
    }
    let f = smallest_factor_big(n);
    if f != *n {
        return false;
    }
    let limit = BigInt::from(TRIAL_DIVISION_LIMIT);
    if *n <= &limit * &limit {
        return true;
    }
    miller_rabin(n)
}

/// Decomposes `q >= 2` as `p^r`, rejecting anything with two distinct prime factors.
pub fn is_prime_power(q: &BigInt) -> Result<PrimePower> {
    if *q < BigInt::from(2) {
        return Err(Error::InvalidArgument(format!("prime power must be >= 2, got {q}")));
    }
    if let Some(v) = q.to_u64() {
        let p = smallest_factor_u64(v);
        let mut rest = v;
        let mut r = 0;
        while rest % p == 0 {
            rest /= p;
            r += 1;
        }
        if rest != 1 {
            return Err(Error::NotPrimePower(q.clone()));
        }
        if p == v && v > TRIAL_DIVISION_LIMIT * TRIAL_DIVISION_LIMIT && !miller_rabin(q) {
            return Err(Error::NotPrimePower(q.clone()));
        }
        return Ok(PrimePower { q: q.clone(), p: BigInt::from(p), r });
    }
    let p = smallest_factor_big(q);
    if p == *q {
        if is_prime(q) {
            return Ok(PrimePower { q: q.clone(), p, r: 1 });
        }
        return Err(Error::NotPrimePower(q.clone()));
    }
    let (r, rest) = split_off(&p, q);
    if !rest.is_one() {
        return Err(Error::NotPrimePower(q.clone()));
    }
    Ok(PrimePower { q: q.clone(), p, r: r as u32 })
}

/// Prime factorization of `n >= 1` as ascending `(prime, exponent)` pairs.
pub fn factorize(n: &BigInt) -> Result<Vec<(BigInt, u32)>> {
    if !n.is_positive() {
        return Err(Error::InvalidArgument(format!("cannot factor {n}")));
    }
    let mut out = Vec::new();
    let mut rest = n.clone();
    while !rest.is_one() {
        let p = smallest_factor_big(&rest);
        if p == rest && !is_prime(&p) {
            return Err(Error::InvalidArgument(format!(
                "{rest} has no factor below {TRIAL_DIVISION_LIMIT}"
            )));
        }
        let (e, cofactor) = split_off(&p, &rest);
        out.push((p, e as u32));
        rest = cofactor;
    }
    Ok(out)
}

/// Distinct primes dividing any of `values`, ascending.
pub fn prime_support<'a>(values: impl IntoIterator<Item = &'a BigInt>) -> Result<Vec<BigInt>> {
    let mut primes = Vec::new();
    for v in values {
        for (p, _) in factorize(v)? {
            primes.push(p);
        }
    }
    primes.sort();
    primes.dedup();
    Ok(primes)
}

/// Exact sign of `x + y sqrt(m)` for integers, `m >= 0`.
pub fn sign_int_surd(x: &BigInt, y: &BigInt, m: &BigInt) -> Ordering {
    let sx = x.sign();
    let sy = if m.is_zero() { Sign::NoSign } else { y.sign() };
    let ord = |s: Sign| match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    };
    match (sx, sy) {
        (s, Sign::NoSign) | (Sign::NoSign, s) => ord(s),
        (a, b) if a == b => ord(a),
        _ => match (x * x).cmp(&(y * y * m)) {
            Ordering::Greater => ord(sx),
            Ordering::Less => ord(sy),
            Ordering::Equal => Ordering::Equal,
        },
    }
}

/// Writes `m = s^2 * core` with `core` square-free.
pub fn square_decomposition(m: &BigInt) -> (BigInt, BigInt) {
    if m.is_zero() {
        return (BigInt::zero(), BigInt::zero());
    }
    let mut s = BigInt::one();
    let mut core = BigInt::one();
    let mut rest = m.abs();
    let mut d = 2u64;
    loop {
        let dd = BigInt::from(d);
        if &dd * &dd * &dd > rest || d > TRIAL_DIVISION_LIMIT {
            break;
        }
        let (e, cofactor) = split_off(&dd, &rest);
        if e > 0 {
            s *= num_traits::pow(dd.clone(), (e / 2) as usize);
            if e % 2 == 1 {
                core *= &dd;
            }
            rest = cofactor;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    // `rest` is now 1, a prime, a product of two primes, or a prime square.
    match exact_sqrt(&rest) {
        Some(r) if !r.is_one() => s *= r,
        _ => core *= rest,
    }
    if m.is_negative() {
        core = -core;
    }
    (s, core)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(&b(0)).unwrap(), b(0));
        assert_eq!(isqrt(&b(16)).unwrap(), b(4));
        let two100 = BigInt::one() << 100;
        assert_eq!(isqrt(&two100).unwrap(), BigInt::one() << 50);
        assert!(matches!(isqrt(&b(-1)), Err(Error::Negative(_))));
    }

    #[test]
    fn isqrt_brackets_every_small_n() {
        for n in 0..=1_000_000i64 {
            let s = isqrt(&b(n)).unwrap().to_i64().unwrap();
            assert!(s * s <= n && n < (s + 1) * (s + 1), "n = {n}");
        }
    }

    #[test]
    fn nu_examples() {
        assert_eq!(nu(&b(2), &b(48)).unwrap(), PAdicValuation::Finite(4));
        assert_eq!(nu(&b(5), &b(7)).unwrap(), PAdicValuation::Finite(0));
        assert_eq!(nu(&b(3), &b(0)).unwrap(), PAdicValuation::Infinite);
        assert!(matches!(nu(&b(6), &b(12)), Err(Error::NotPrime(_))));
        assert!(PAdicValuation::Infinite > PAdicValuation::Finite(u64::MAX));
        assert!(PAdicValuation::Infinite.at_least_half_of(7));
    }

    #[test]
    fn nu_is_additive() {
        for p in [2i64, 3, 5, 7] {
            for x in 1..60i64 {
                for y in 1..60i64 {
                    let lhs = nu(&b(p), &b(x * y)).unwrap();
                    let rhs = nu(&b(p), &b(x)).unwrap() + nu(&b(p), &b(y)).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn prime_power_examples() {
        let pp = is_prime_power(&b(16)).unwrap();
        assert_eq!((pp.p().clone(), pp.r()), (b(2), 4));
        let pp = is_prime_power(&b(7)).unwrap();
        assert_eq!((pp.p().clone(), pp.r()), (b(7), 1));
        assert!(matches!(is_prime_power(&b(12)), Err(Error::NotPrimePower(_))));
        assert!(matches!(is_prime_power(&b(1)), Err(Error::InvalidArgument(_))));
        let big = num_traits::pow(b(1_000_003), 3);
        let pp = is_prime_power(&big).unwrap();
        assert_eq!((pp.p().clone(), pp.r()), (b(1_000_003), 3));
    }

    #[test]
    fn prime_power_matches_factorization() {
        for q in 2..5000i64 {
            let f = factorize(&b(q)).unwrap();
            assert_eq!(is_prime_power(&b(q)).is_ok(), f.len() == 1, "q = {q}");
        }
    }

    #[test]
    fn large_prime_uses_miller_rabin() {
        // 2^61 - 1 is prime; 2^61 + 1 is divisible by 3.
        let m61 = (BigInt::one() << 61) - 1;
        assert!(is_prime(&m61));
        assert!(!is_prime(&(&m61 + 2)));
    }

    #[test]
    fn square_decomposition_examples() {
        assert_eq!(square_decomposition(&b(8)), (b(2), b(2)));
        assert_eq!(square_decomposition(&b(72)), (b(6), b(2)));
        assert_eq!(square_decomposition(&b(49)), (b(7), b(1)));
        assert_eq!(square_decomposition(&b(1)), (b(1), b(1)));
        assert_eq!(square_decomposition(&b(101 * 101 * 3)), (b(101), b(3)));
        assert_eq!(square_decomposition(&b(1_000_003 * 1_000_003)), (b(1_000_003), b(1)));
    }
}
