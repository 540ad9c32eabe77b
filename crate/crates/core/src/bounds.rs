//! Exact forms of the size bounds on `n1`.
//!
//! Throughout, `m = 4 n3^2 n2 n4`, so that `2 n3 sqrt(n2 n4) = sqrt(m)` and
//! integrality is a perfect-square test.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{Error, Result};
use crate::intarith::{exact_sqrt, isqrt, sign_int_surd, sqrt_dist, PrimePower, QuadraticSurd};
use crate::occurrence::GroupShape;

/// `m = 4 n3^2 n2 n4`.
pub fn radicand(n2: &BigInt, n3: &BigInt, n4: &BigInt) -> BigInt {
    BigInt::from(4) * n3 * n3 * n2 * n4
}

fn shape_radicand(shape: &GroupShape) -> BigInt {
    radicand(shape.n2(), shape.n3(), shape.n4())
}

/// Distance from `sqrt(m)` to the nearest integer, or 1 when `sqrt(m)` is an integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaValue {
    m: BigInt,
    value: QuadraticSurd,
}

impl DeltaValue {
    pub fn m(&self) -> &BigInt {
        &self.m
    }

    pub fn value(&self) -> &QuadraticSurd {
        &self.value
    }

    /// True when `sqrt(m)` is an integer, i.e. the value was replaced by 1.
    pub fn is_integral(&self) -> bool {
        exact_sqrt(&self.m).is_some()
    }
}

pub fn delta(n2: &BigInt, n3: &BigInt, n4: &BigInt) -> Result<DeltaValue> {
    for n in [n2, n3, n4] {
        if !n.is_positive() {
            return Err(Error::InvalidArgument(format!("expected a positive integer, got {n}")));
        }
    }
    let m = radicand(n2, n3, n4);
    let value = if exact_sqrt(&m).is_some() { QuadraticSurd::integer(1) } else { sqrt_dist(&m)? };
    Ok(DeltaValue { m, value })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundStatus {
    Holds,
    Violated,
    Undecided,
}

impl BoundStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundStatus::Holds => "holds",
            BoundStatus::Violated => "violated",
            BoundStatus::Undecided => "undecided",
        }
    }
}

impl fmt::Display for BoundStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of a bound check. `precision_bits = 0` means the decision was exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundVerdict {
    pub status: BoundStatus,
    pub precision_bits: u64,
}

impl BoundVerdict {
    fn exact(holds: bool) -> Self {
        let status = if holds { BoundStatus::Holds } else { BoundStatus::Violated };
        BoundVerdict { status, precision_bits: 0 }
    }
}

/// `(n1 - 1)^4 >= 60^4 n2 n3^6 n4^3`.
pub fn thm1_threshold_reached(shape: &GroupShape) -> bool {
    let lhs: BigInt = Pow::pow(shape.n1() - BigInt::one(), 4u32);
    let rhs = BigInt::from(60u32).pow(4u32)
        * shape.n2()
        * Pow::pow(shape.n3(), 6u32)
        * Pow::pow(shape.n4(), 3u32);
    lhs >= rhs
}

/// Smallest `n1` reaching the threshold for the given `(n2, n3, n4)`.
pub fn thm1_threshold(n2: &BigInt, n3: &BigInt, n4: &BigInt) -> BigInt {
    let rhs = BigInt::from(60u32).pow(4u32) * n2 * Pow::pow(n3, 6u32) * Pow::pow(n4, 3u32);
    // n1 - 1 = ceil(rhs^(1/4))
    let r = rhs.nth_root(4);
    let c = if Pow::pow(&r, 4u32) == rhs { r } else { r + 1 };
    c + 1
}

/// `5 sqrt(m) / delta`, the threshold on `sqrt(q)` beyond which no `k` survives.
fn sqrt_q_threshold(d: &DeltaValue) -> QuadraticSurd {
    let root = QuadraticSurd::sqrt(&d.m).expect("m > 0");
    let five_root = root.checked_mul(&QuadraticSurd::integer(5)).expect("rational factor");
    five_root.checked_div(&d.value).expect("delta shares the radicand of sqrt(m)")
}

/// The size bound on `n1`, multiplied through by `(n2^3 n3^2 n4)^(1/4)`:
/// `n1 (n2^3 n3^2 n4)^(1/4) < 5 sqrt(m)/delta + 1`, then raised to the fourth power.
pub fn prop31_bound_check(shape: &GroupShape) -> BoundVerdict {
    let d = delta(shape.n2(), shape.n3(), shape.n4()).expect("shape entries are positive");
    let rhs = sqrt_q_threshold(&d).checked_add(&QuadraticSurd::integer(1)).expect("rational");
    let rhs4 = rhs.pow(4);
    let weight = Pow::pow(shape.n2(), 3u32) * shape.n3() * shape.n3() * shape.n4();
    let lhs4 = Pow::pow(shape.n1(), 4u32) * weight;
    BoundVerdict::exact(rhs4.cmp_rational(&BigRational::from_integer(lhs4)) == Ordering::Greater)
}

/// `sqrt(q) >= 5 sqrt(m)/delta`, compared as `q >= (5 sqrt(m)/delta)^2`.
pub fn lemma34_interval_empty(q: &PrimePower, shape: &GroupShape) -> bool {
    let d = delta(shape.n2(), shape.n3(), shape.n4()).expect("shape entries are positive");
    let t = sqrt_q_threshold(&d);
    let t2 = t.checked_mul(&t).expect("same radicand");
    t2.cmp_rational(&BigRational::from_integer(q.q().clone())) != Ordering::Greater
}

/// Whether integer `k` lies strictly inside `(sqrt(m) u^2, sqrt(m) / u^2)` with
/// `u = (sqrt(q) - 1)/(sqrt(q) + 1)`.
///
/// With `(sqrt(q) -+ 1)^4 = A -+ B sqrt(q)`, `A = q^2 + 6q + 1`, `B = 4(q + 1)`, the two
/// sides are `(k^2 - m) A + (k^2 + m) B sqrt(q) > 0` and `(m - k^2) A + (k^2 + m) B sqrt(q) > 0`.
pub fn k_in_interval(q: &BigInt, m: &BigInt, k: &BigInt) -> bool {
    if !k.is_positive() {
        return false;
    }
    let a = q * q + BigInt::from(6) * q + 1;
    let b = BigInt::from(4) * (q + 1);
    let k2 = k * k;
    let y = (&k2 + m) * &b;
    let lower = sign_int_surd(&((&k2 - m) * &a), &y, q) == Ordering::Greater;
    let upper = sign_int_surd(&((m - &k2) * &a), &y, q) == Ordering::Greater;
    lower && upper
}

/// All integers strictly inside the `k`-interval for `(q, m)`.
///
/// The lower side is increasing in `k` and the upper side decreasing, so the
/// set is a contiguous run located by bisection.
pub fn k_interval_integers(q: &BigInt, m: &BigInt) -> Vec<BigInt> {
    let a = q * q + BigInt::from(6) * q + 1;
    let b = BigInt::from(4) * (q + 1);
    let lower_ok = |k: &BigInt| {
        let k2 = k * k;
        sign_int_surd(&((&k2 - m) * &a), &((&k2 + m) * &b), q) == Ordering::Greater
    };
    let upper_ok = |k: &BigInt| {
        let k2 = k * k;
        sign_int_surd(&((m - &k2) * &a), &((&k2 + m) * &b), q) == Ordering::Greater
    };
    // sqrt(m) is inside the interval, so ceil(sqrt(m)) satisfies the lower side
    // and floor(sqrt(m)) satisfies the upper side (when positive).
    let root = isqrt(m).expect("m >= 0");
    // Largest k with upper_ok: exponential then binary search from floor(sqrt(m)).
    let hi = {
        let mut lo = root.clone();
        if !upper_ok(&lo) {
            return Vec::new();
        }
        let mut step = BigInt::one();
        let mut bad = &lo + &step;
        while upper_ok(&bad) {
            lo = bad.clone();
            step *= 2;
            bad = &lo + &step;
        }
        while &bad - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &bad).div_floor(&BigInt::from(2));
            if upper_ok(&mid) {
                lo = mid;
            } else {
                bad = mid;
            }
        }
        lo
    };
    // Smallest k >= 1 with lower_ok, searched in [1, root + 1].
    let lo = {
        let mut good = &root + 1;
        if !lower_ok(&good) {
            return Vec::new();
        }
        let mut bad = BigInt::zero();
        while &good - &bad > BigInt::one() {
            let mid: BigInt = (&good + &bad).div_floor(&BigInt::from(2));
            if mid.is_positive() && lower_ok(&mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let mut out = Vec::new();
    let mut k = lo;
    while k <= hi {
        out.push(k.clone());
        k += 1;
    }
    out
}

/// `||sqrt(m)|| > 1/(3 sqrt(m))` for non-square `m`, decided on the nearer side.
///
/// Lower side `sqrt(m) - s`: `(3m - 1)^2 > 9 s^2 m`.
/// Upper side `s + 1 - sqrt(m)`: `9 (s + 1)^2 m > (3m + 1)^2`.
pub fn lemma41_check(m: &BigInt) -> Result<bool> {
    if !m.is_positive() {
        return Err(Error::InvalidArgument(format!("expected m >= 1, got {m}")));
    }
    if exact_sqrt(m).is_some() {
        return Err(Error::PerfectSquare(m.clone()));
    }
    let s = isqrt(m)?;
    let two_s1 = BigInt::from(2) * &s + 1;
    let lower_nearer = BigInt::from(4) * m < &two_s1 * &two_s1;
    let three_m = BigInt::from(3) * m;
    Ok(if lower_nearer {
        let l = &three_m - 1;
        &l * &l > BigInt::from(9) * &s * &s * m
    } else {
        let s1 = &s + 1;
        let r = &three_m + 1;
        BigInt::from(9) * &s1 * &s1 * m > &r * &r
    })
}

/// `u64` fast path of [`lemma41_check`] for exhaustive sweeps; `None` on a perfect square.
pub fn lemma41_check_u64(m: u64) -> Option<bool> {
    let s = m.isqrt();
    if s * s == m {
        return None;
    }
    let (m, s) = (m as u128, s as u128);
    let lower_nearer = 4 * m < (2 * s + 1) * (2 * s + 1);
    // 3m +- 1 < 2^66 squared overflows u128 past m ~ 2^62; sweeps stay far below.
    Some(if lower_nearer {
        let l = 3 * m - 1;
        l * l > 9 * s * s * m
    } else {
        let r = 3 * m + 1;
        9 * (s + 1) * (s + 1) * m > r * r
    })
}

/// `a1^2 - 4 a2 + 8q` for `k = sqrt(m)`, `a1 = k n1^2 n2 - 2(q + 1)` and `a2` from the
/// order equation. The algebra forces this to vanish.
pub fn degenerate_k_identity(q: &PrimePower, shape: &GroupShape) -> Result<BigInt> {
    let m = shape_radicand(shape);
    let k = exact_sqrt(&m).ok_or_else(|| {
        Error::InvalidArgument(format!("2 n3 sqrt(n2 n4) = sqrt({m}) is not an integer"))
    })?;
    let q = q.q();
    let q1 = q + 1;
    let a1 = &k * shape.n1() * shape.n1() * shape.n2() - BigInt::from(2) * &q1;
    let a2 = shape.order() - 1 - &a1 * &q1 - q * q;
    Ok(&a1 * &a1 - BigInt::from(4) * a2 + BigInt::from(8) * q)
}
