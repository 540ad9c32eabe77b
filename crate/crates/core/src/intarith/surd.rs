//! Exact arithmetic on `a + b sqrt(m)` with rational `a`, `b`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{exact_sqrt, square_decomposition};
use crate::error::{Error, Result};

/// Starting precision for comparisons across different radicands.
const MIXED_START_BITS: u64 = 128;

/// `a + b sqrt(m)` with `m` square-free, or `m = 0` for a plain rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadraticSurd {
    a: BigRational,
    b: BigRational,
    m: BigInt,
}

impl QuadraticSurd {
    pub fn new(a: BigRational, b: BigRational, m: BigInt) -> Result<Self> {
        if m.is_negative() {
            return Err(Error::Negative(m));
        }
        let (s, core) = square_decomposition(&m);
        let b = b * BigRational::from_integer(s);
        Ok(Self::normalized(a, b, core))
    }

    fn normalized(a: BigRational, b: BigRational, m: BigInt) -> Self {
        if m.is_zero() || b.is_zero() {
            return QuadraticSurd { a, b: BigRational::zero(), m: BigInt::zero() };
        }
        if m.is_one() {
            return QuadraticSurd { a: a + b, b: BigRational::zero(), m: BigInt::zero() };
        }
        QuadraticSurd { a, b, m }
    }

    pub fn rational(a: BigRational) -> Self {
        QuadraticSurd { a, b: BigRational::zero(), m: BigInt::zero() }
    }

    pub fn integer(a: impl Into<BigInt>) -> Self {
        Self::rational(BigRational::from_integer(a.into()))
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    /// `sqrt(n)` for `n >= 0`.
    pub fn sqrt(n: &BigInt) -> Result<Self> {
        Self::new(BigRational::zero(), BigRational::one(), n.clone())
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.b
    }

    /// The square-free radicand, `0` when the value is rational.
    pub fn radicand(&self) -> &BigInt {
        &self.m
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a)
    }

    /// Exact sign of the value.
    pub fn signum(&self) -> Ordering {
        sign_of(&self.a, &self.b, &self.m)
    }

    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        sign_of(&(&self.a - r), &self.b, &self.m)
    }

    fn common_radicand(&self, other: &Self) -> Option<BigInt> {
        if self.m == other.m || other.m.is_zero() {
            Some(self.m.clone())
        } else if self.m.is_zero() {
            Some(other.m.clone())
        } else {
            None
        }
    }

    /// `1 / self` through the conjugate; `None` for zero or mixed results.
    pub fn recip(&self) -> Option<Self> {
        if self.signum() == Ordering::Equal {
            return None;
        }
        // (a - b sqrt m) / (a^2 - b^2 m)
        let m = BigRational::from_integer(self.m.clone());
        let norm = &self.a * &self.a - &self.b * &self.b * m;
        Some(Self::normalized(&self.a / &norm, -&self.b / &norm, self.m.clone()))
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        let m = self.common_radicand(other)?;
        Some(Self::normalized(&self.a + &other.a, &self.b + &other.b, m))
    }

    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        let m = self.common_radicand(other)?;
        let mr = BigRational::from_integer(m.clone());
        let a = &self.a * &other.a + &self.b * &other.b * mr;
        let b = &self.a * &other.b + &self.b * &other.a;
        Some(Self::normalized(a, b, m))
    }

    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        self.checked_mul(&other.recip()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::integer(1);
        for _ in 0..e {
            acc = acc.checked_mul(self).expect("same radicand");
        }
        acc
    }

    /// Encloses the value in `[lo, hi]` using `bits` fractional bits for `sqrt(m)`.
    fn enclose(&self, bits: u64) -> (BigRational, BigRational) {
        if self.is_rational() {
            return (self.a.clone(), self.a.clone());
        }
        let (lo, hi) = sqrt_bracket(&self.m, bits);
        let (x, y) = (&self.b * &lo, &self.b * &hi);
        let (l, h) = if self.b.is_positive() { (x, y) } else { (y, x) };
        (&self.a + l, &self.a + h)
    }

    /// Compares values over different radicands, refining precision up to `cap_bits`.
    ///
    /// Equality is decided exactly: `1`, `sqrt(m)` and `sqrt(n)` are linearly
    /// independent over the rationals for distinct square-free `m, n > 1`.
    pub fn try_cmp(&self, other: &Self, cap_bits: u64) -> Option<Ordering> {
        if let Some(diff) = self.checked_sub(other) {
            return Some(diff.signum());
        }
        let mut bits = MIXED_START_BITS;
        loop {
            let (l1, h1) = self.enclose(bits);
            let (l2, h2) = other.enclose(bits);
            if h1 < l2 {
                return Some(Ordering::Less);
            }
            if h2 < l1 {
                return Some(Ordering::Greater);
            }
            if bits >= cap_bits {
                return None;
            }
            bits = (bits * 2).min(cap_bits.max(MIXED_START_BITS));
        }
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        self.checked_add(&-other)
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.enclose(80);
        let mid = (lo + hi) / BigRational::from_integer(BigInt::from(2));
        mid.to_f64().unwrap_or(f64::NAN)
    }
}

/// `[floor(sqrt(m) 2^bits), that + 1] / 2^bits`.
pub(crate) fn sqrt_bracket(m: &BigInt, bits: u64) -> (BigRational, BigRational) {
    let scaled: BigInt = m << (2 * bits);
    let s = scaled.sqrt();
    let den = BigInt::one() << bits;
    let lo = BigRational::new(s.clone(), den.clone());
    let hi = if &s * &s == scaled { lo.clone() } else { BigRational::new(s + 1, den) };
    (lo, hi)
}

/// Sign of `x + y sqrt(m)` without rounding.
fn sign_of(x: &BigRational, y: &BigRational, m: &BigInt) -> Ordering {
    let sx = x.cmp(&BigRational::zero());
    let sy = if m.is_zero() { Ordering::Equal } else { y.cmp(&BigRational::zero()) };
    match (sx, sy) {
        (s, Ordering::Equal) => s,
        (Ordering::Equal, s) => s,
        (a, b) if a == b => a,
        _ => {
            // Opposite signs: compare x^2 with y^2 m.
            let lhs = x * x;
            let rhs = y * y * BigRational::from_integer(m.clone());
            match lhs.cmp(&rhs) {
                Ordering::Greater => sx,
                Ordering::Less => sy,
                Ordering::Equal => Ordering::Equal,
            }
        }
    }
}

impl PartialOrd for QuadraticSurd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticSurd {
    fn cmp(&self, other: &Self) -> Ordering {
        self.try_cmp(other, u64::MAX).expect("distinct algebraic values separate")
    }
}

impl Neg for QuadraticSurd {
    type Output = QuadraticSurd;

    fn neg(self) -> Self {
        QuadraticSurd { a: -self.a, b: -self.b, m: self.m }
    }
}

impl Neg for &QuadraticSurd {
    type Output = QuadraticSurd;

    fn neg(self) -> QuadraticSurd {
        -self.clone()
    }
}

macro_rules! same_radicand_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for &QuadraticSurd {
            type Output = QuadraticSurd;

            /// Panics when both operands carry different radicands.
            fn $method(self, rhs: Self) -> QuadraticSurd {
                self.$checked(rhs).expect("operands over different radicands")
            }
        }

        impl $trait for QuadraticSurd {
            type Output = QuadraticSurd;

            fn $method(self, rhs: Self) -> QuadraticSurd {
                (&self).$method(&rhs)
            }
        }
    };
}

same_radicand_op!(Add, add, checked_add);
same_radicand_op!(Sub, sub, checked_sub);
same_radicand_op!(Mul, mul, checked_mul);

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.a);
        }
        if !self.a.is_zero() {
            write!(f, "{} ", self.a)?;
            f.write_str(if self.b.is_negative() { "- " } else { "+ " })?;
        } else if self.b.is_negative() {
            f.write_str("-")?;
        }
        let b = self.b.abs();
        if !b.is_one() {
            write!(f, "{b}*")?;
        }
        write!(f, "sqrt({})", self.m)
    }
}

/// Distance from `sqrt(m)` to the nearest integer, exactly.
///
/// With `s = isqrt(m)`, the nearer neighbour is `s` iff `4m < (2s+1)^2`.
pub fn sqrt_dist(m: &BigInt) -> Result<QuadraticSurd> {
    if !m.is_positive() {
        return Err(Error::InvalidArgument(format!("sqrt_dist needs m >= 1, got {m}")));
    }
    if exact_sqrt(m).is_some() {
        return Ok(QuadraticSurd::zero());
    }
    let s = m.sqrt();
    let root = QuadraticSurd::sqrt(m)?;
    let two_s_plus_1 = BigInt::from(2) * &s + 1;
    let lower_is_nearer = BigInt::from(4) * m < &two_s_plus_1 * &two_s_plus_1;
    Ok(if lower_is_nearer {
        &root - &QuadraticSurd::integer(s)
    } else {
        &QuadraticSurd::integer(s + 1) - &root
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn surd(a: (i64, i64), b: (i64, i64), m: i64) -> QuadraticSurd {
        QuadraticSurd::new(r(a.0, a.1), r(b.0, b.1), BigInt::from(m)).unwrap()
    }

    #[test]
    fn normalization() {
        let x = QuadraticSurd::sqrt(&BigInt::from(8)).unwrap();
        assert_eq!(x.radicand(), &BigInt::from(2));
        assert_eq!(x.surd_part(), &r(2, 1));
        let y = QuadraticSurd::sqrt(&BigInt::from(49)).unwrap();
        assert_eq!(y.as_rational(), Some(&r(7, 1)));
        let z = surd((3, 1), (5, 1), 1);
        assert_eq!(z.as_rational(), Some(&r(8, 1)));
        assert!(QuadraticSurd::sqrt(&BigInt::from(-2)).is_err());
    }

    #[test]
    fn sqrt_dist_examples() {
        // Reference decimals computed to 30 digits: sqrt(2) - 1, sqrt(5) - 2.
        let d4 = sqrt_dist(&BigInt::from(4)).unwrap();
        assert_eq!(d4, QuadraticSurd::zero());
        let d2 = sqrt_dist(&BigInt::from(2)).unwrap();
        assert_eq!(d2, surd((-1, 1), (1, 1), 2));
        assert!((d2.to_f64() - 0.414_213_562_373_095).abs() < 1e-15);
        let d5 = sqrt_dist(&BigInt::from(5)).unwrap();
        assert_eq!(d5, surd((-2, 1), (1, 1), 5));
        assert!((d5.to_f64() - 0.236_067_977_499_789_7).abs() < 1e-15);
        // 8: 2 sqrt 2 = 2.828..., nearer to 3.
        let d8 = sqrt_dist(&BigInt::from(8)).unwrap();
        assert_eq!(d8, surd((3, 1), (-2, 1), 2));
    }

    #[test]
    fn sign_exact_near_cancellation() {
        // 99 - 70 sqrt 2 = 0.00505... > 0 and 577 - 408 sqrt 2 = 0.000866... > 0
        assert_eq!(surd((99, 1), (-70, 1), 2).signum(), Ordering::Greater);
        assert_eq!(surd((-577, 1), (408, 1), 2).signum(), Ordering::Less);
        assert_eq!(surd((0, 1), (0, 1), 2).signum(), Ordering::Equal);
    }

    #[test]
    fn recip_and_div() {
        let x = surd((3, 1), (-2, 1), 2);
        let inv = x.recip().unwrap();
        assert_eq!(inv, surd((3, 1), (2, 1), 2));
        assert_eq!(&x * &inv, QuadraticSurd::integer(1));
        assert!(QuadraticSurd::zero().recip().is_none());
    }

    #[test]
    fn mixed_radicands() {
        let s2 = QuadraticSurd::sqrt(&BigInt::from(2)).unwrap();
        let s3 = QuadraticSurd::sqrt(&BigInt::from(3)).unwrap();
        assert!(s2 < s3);
        // sqrt(2) + sqrt(3) vs sqrt(10): 3.146 vs 3.162
        let lhs = surd((0, 1), (1, 1), 2);
        assert_eq!(lhs.try_cmp(&s3, 4096), Some(Ordering::Less));
        let close = surd((1_414_213_562, 1_000_000_000), (0, 1), 0);
        assert_eq!(s2.cmp(&close), Ordering::Greater);
    }

    proptest! {
        #[test]
        fn sqrt_dist_is_at_most_half(m in 1u64..2_000_000) {
            let m = BigInt::from(m);
            let d = sqrt_dist(&m).unwrap();
            prop_assert!(d.cmp_rational(&r(1, 2)) != Ordering::Greater);
            prop_assert!(d.signum() != Ordering::Less);
            prop_assert_eq!(d.signum() == Ordering::Equal, exact_sqrt(&m).is_some());
        }

        #[test]
        fn order_is_strict_and_total(
            a1 in -50i64..50, b1 in -50i64..50,
            a2 in -50i64..50, b2 in -50i64..50,
            m1 in prop::sample::select(vec![0i64, 2, 3, 5, 6, 7]),
            m2 in prop::sample::select(vec![0i64, 2, 3, 5, 6, 7]),
        ) {
            let x = surd((a1, 3), (b1, 7), m1);
            let y = surd((a2, 3), (b2, 7), m2);
            let fx = x.to_f64();
            let fy = y.to_f64();
            match x.cmp(&y) {
                Ordering::Equal => prop_assert_eq!(&x, &y),
                Ordering::Less => prop_assert!(fx <= fy + 1e-9 && y.cmp(&x) == Ordering::Greater),
                Ordering::Greater => prop_assert!(fx + 1e-9 >= fy && y.cmp(&x) == Ordering::Less),
            }
        }
    }
}
