//! Degree-4 Weil polynomials `T^4 + a1 T^3 + a2 T^2 + a1 q T + q^2` and their
//! classification into field-simple isogeny classes, the exceptional
//! non-field shapes, and rejects.
//!
//! Every inequality involving `sqrt(q)` is evaluated in an integer-only form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::intarith::{
    has_root_in_zp, is_perfect_square, is_square_in_zp, sign_int_surd, valuation, PrimePower,
};
use crate::occurrence::GroupShape;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeilSurfacePolynomial {
    q: PrimePower,
    a1: BigInt,
    a2: BigInt,
}

impl WeilSurfacePolynomial {
    pub fn new(q: PrimePower, a1: BigInt, a2: BigInt) -> Self {
        WeilSurfacePolynomial { q, a1, a2 }
    }

    pub fn q(&self) -> &PrimePower {
        &self.q
    }

    pub fn a1(&self) -> &BigInt {
        &self.a1
    }

    pub fn a2(&self) -> &BigInt {
        &self.a2
    }

    /// Ascending coefficients `[q^2, a1 q, a2, a1, 1]`.
    pub fn coefficients(&self) -> [BigInt; 5] {
        let q = self.q.q();
        [q * q, &self.a1 * q, self.a2.clone(), self.a1.clone(), BigInt::one()]
    }

    /// `f(1) = q^2 + a1 q + a2 + a1 + 1`, the number of rational points.
    pub fn f_at_one(&self) -> BigInt {
        f_at_one(self.q.q(), &self.a1, &self.a2)
    }
}

pub(crate) fn f_at_one(q: &BigInt, a1: &BigInt, a2: &BigInt) -> BigInt {
    q * q + a1 * q + a2 + a1 + 1
}

impl fmt::Display for WeilSurfacePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T^4 + ({})T^3 + ({})T^2 + ({})T + {}", self.a1, self.a2, &self.a1 * self.q.q(), self.q.q() * self.q.q())
    }
}

/// One of the exceptional non-field shapes of a simple surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExceptionalCase {
    /// `(T^2 - q)^2`, `r` odd.
    A,
    /// `(T^2 + q)^2`, `r` even, `p = 1 mod 4`.
    B,
    /// `(T^2 + sqrt(q) T + q)^2`, `r` even, `p = 1 mod 3`.
    CPlus,
    /// `(T^2 - sqrt(q) T + q)^2`, `r` even, `p = 1 mod 3`.
    CMinus,
}

impl ExceptionalCase {
    pub fn as_str(self) -> &'static str {
        match self {
            ExceptionalCase::A => "a",
            ExceptionalCase::B => "b",
            ExceptionalCase::CPlus => "c+",
            ExceptionalCase::CMinus => "c-",
        }
    }

    pub fn kind(self) -> ClassKind {
        match self {
            ExceptionalCase::A => ClassKind::ExceptionalA,
            ExceptionalCase::B => ClassKind::ExceptionalB,
            ExceptionalCase::CPlus => ClassKind::ExceptionalCPlus,
            ExceptionalCase::CMinus => ClassKind::ExceptionalCMinus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassKind {
    FieldSimple,
    ExceptionalA,
    ExceptionalB,
    ExceptionalCPlus,
    ExceptionalCMinus,
    Rejected,
}

impl ClassKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassKind::FieldSimple => "FieldSimple",
            ClassKind::ExceptionalA => "ExceptionalA",
            ClassKind::ExceptionalB => "ExceptionalB",
            ClassKind::ExceptionalCPlus => "ExceptionalCPlus",
            ClassKind::ExceptionalCMinus => "ExceptionalCMinus",
            ClassKind::Rejected => "Rejected",
        }
    }

    pub fn is_exceptional(self) -> bool {
        !matches!(self, ClassKind::FieldSimple | ClassKind::Rejected)
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    FailsA,
    FailsB,
    FailsC,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::FailsA => "fails-a",
            RejectReason::FailsB => "fails-b",
            RejectReason::FailsC => "fails-c",
        }
    }
}

/// Which alternatives of the p-adic condition held.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PadicBranches {
    pub unit_a1: bool,
    pub unit_a2: bool,
    pub no_root: bool,
}

impl PadicBranches {
    pub fn any(self) -> bool {
        self.unit_a1 || self.unit_a2 || self.no_root
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Classification {
    kind: ClassKind,
    reject_reason: Option<RejectReason>,
    branches: PadicBranches,
}

impl Classification {
    fn accepted(kind: ClassKind, branches: PadicBranches) -> Self {
        Classification { kind, reject_reason: None, branches }
    }

    fn rejected(reason: RejectReason, branches: PadicBranches) -> Self {
        Classification { kind: ClassKind::Rejected, reject_reason: Some(reason), branches }
    }

    pub fn kind(&self) -> ClassKind {
        self.kind
    }

    pub fn reject_reason(&self) -> Option<RejectReason> {
        self.reject_reason
    }

    /// Diagnostic record of the p-adic alternatives; all false unless that condition was reached.
    pub fn branches(&self) -> PadicBranches {
        self.branches
    }

    pub fn is_field_simple(&self) -> bool {
        self.kind == ClassKind::FieldSimple
    }
}

/// The archimedean condition: `a1^2 < 16q`, `2|a1|sqrt(q) - 2q < a2`, `4 a2 < a1^2 + 8q`.
pub fn in_weil_region(q: &BigInt, a1: &BigInt, a2: &BigInt) -> bool {
    let a1sq = a1 * a1;
    if a1sq >= BigInt::from(16) * q {
        return false;
    }
    let t = a2 + BigInt::from(2) * q;
    if !t.is_positive() || &t * &t <= BigInt::from(4) * &a1sq * q {
        return false;
    }
    BigInt::from(4) * a2 < a1sq + BigInt::from(8) * q
}

/// Matches `(q, a1, a2)` against the exceptional shapes.
pub fn detect_exceptional(q: &PrimePower, a1: &BigInt, a2: &BigInt) -> Option<ExceptionalCase> {
    let qq = q.q();
    let p = q.p();
    if a1.is_zero() {
        if *a2 == -(BigInt::from(2) * qq) && !q.r_is_even() {
            return Some(ExceptionalCase::A);
        }
        if *a2 == BigInt::from(2) * qq && q.r_is_even() && p.mod_floor(&BigInt::from(4)).is_one() {
            return Some(ExceptionalCase::B);
        }
        return None;
    }
    let root = q.exact_sqrt()?;
    if *a2 != BigInt::from(3) * qq || !p.mod_floor(&BigInt::from(3)).is_one() {
        return None;
    }
    let two_root = BigInt::from(2) * root;
    if *a1 == two_root {
        Some(ExceptionalCase::CPlus)
    } else if *a1 == -two_root {
        Some(ExceptionalCase::CMinus)
    } else {
        None
    }
}

/// The `(a1, a2)` pairs at which [`detect_exceptional`] fires for `q`.
pub fn exceptional_pairs(q: &PrimePower) -> Vec<(BigInt, BigInt, ExceptionalCase)> {
    let qq = q.q();
    let mut out = Vec::new();
    let candidates = [
        (BigInt::zero(), -(BigInt::from(2) * qq)),
        (BigInt::zero(), BigInt::from(2) * qq),
    ];
    for (a1, a2) in candidates {
        if let Some(case) = detect_exceptional(q, &a1, &a2) {
            out.push((a1, a2, case));
        }
    }
    if let Some(root) = q.exact_sqrt() {
        for a1 in [BigInt::from(-2) * &root, BigInt::from(2) * &root] {
            let a2 = BigInt::from(3) * qq;
            if let Some(case) = detect_exceptional(q, &a1, &a2) {
                out.push((a1, a2, case));
            }
        }
    }
    out.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
    out
}

/// Classifies `(q, a1, a2)`: exceptional shapes first, then the three
/// field-algebra conditions in order, reporting the first that fails.
pub fn ruck_classify(q: &PrimePower, a1: &BigInt, a2: &BigInt) -> Classification {
    if let Some(case) = detect_exceptional(q, a1, a2) {
        return Classification::accepted(case.kind(), PadicBranches::default());
    }
    let qq = q.q();
    if !in_weil_region(qq, a1, a2) {
        return Classification::rejected(RejectReason::FailsA, PadicBranches::default());
    }
    let disc_like = a1 * a1 - BigInt::from(4) * a2 + BigInt::from(8) * qq;
    if is_perfect_square(&disc_like) {
        return Classification::rejected(RejectReason::FailsB, PadicBranches::default());
    }
    let branches = padic_branches(q, a1, a2);
    if branches.any() {
        Classification::accepted(ClassKind::FieldSimple, branches)
    } else {
        Classification::rejected(RejectReason::FailsC, branches)
    }
}

fn padic_branches(q: &PrimePower, a1: &BigInt, a2: &BigInt) -> PadicBranches {
    let p = q.p();
    let r = q.r();
    let qq = q.q();
    let v1 = valuation(p, a1);
    let v2 = valuation(p, a2);
    let unit_a1 = v1.is_zero() && v2.at_least_half_of(r) && {
        let t = a2 + BigInt::from(2) * qq;
        let x = &t * &t - BigInt::from(4) * qq * a1 * a1;
        !is_square_in_zp(p, &x)
    };
    let unit_a2 = v2.is_zero();
    let no_root = v1.at_least_half_of(r) && v2.at_least(r) && {
        let w = WeilSurfacePolynomial::new(q.clone(), a1.clone(), a2.clone());
        // A zero discriminant leaves the branch inapplicable.
        matches!(has_root_in_zp(p, &w.coefficients()), Ok(false))
    };
    PadicBranches { unit_a1, unit_a2, no_root }
}

/// Group shapes attached to an exceptional case.
///
/// Case A yields three candidates when `q` is odd; for even `q` only
/// `(Z/(q-1))^2` is meaningful. The others yield one shape each.
pub fn xing_groups(case: ExceptionalCase, q: &PrimePower) -> Result<Vec<GroupShape>> {
    let qq = q.q();
    let mismatch = || Error::CaseMismatch { case: case.as_str(), q: qq.clone() };
    let one = BigInt::one();
    let two = BigInt::from(2);
    let groups: Vec<Vec<BigInt>> = match case {
        ExceptionalCase::A => {
            if q.r_is_even() {
                return Err(mismatch());
            }
            let qm1 = qq - &one;
            let mut g = vec![vec![qm1.clone(), qm1.clone()]];
            if qq.is_odd() {
                let half = &qm1 / &two;
                g.push(vec![two.clone(), two.clone(), half.clone(), half.clone()]);
                g.push(vec![two.clone(), half, qm1]);
            }
            g
        }
        ExceptionalCase::B => {
            if !q.r_is_even() || !q.p().mod_floor(&BigInt::from(4)).is_one() {
                return Err(mismatch());
            }
            let n = qq + &one;
            vec![vec![n.clone(), n]]
        }
        ExceptionalCase::CPlus | ExceptionalCase::CMinus => {
            let root = q.exact_sqrt().ok_or_else(mismatch)?;
            if !q.p().mod_floor(&BigInt::from(3)).is_one() {
                return Err(mismatch());
            }
            let n = if case == ExceptionalCase::CPlus { qq + root + &one } else { qq - root + &one };
            vec![vec![n.clone(), n]]
        }
    };
    let mut shapes = groups
        .iter()
        .map(|factors| GroupShape::from_cyclic_factors(factors))
        .collect::<Result<Vec<_>>>()?;
    shapes.sort();
    shapes.dedup();
    Ok(shapes)
}

/// An `(a1, a2)` pair with its classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsogenyClassEntry {
    pub a1: BigInt,
    pub a2: BigInt,
    pub classification: Classification,
}

impl IsogenyClassEntry {
    pub fn polynomial(&self, q: &PrimePower) -> WeilSurfacePolynomial {
        WeilSurfacePolynomial::new(q.clone(), self.a1.clone(), self.a2.clone())
    }
}

/// Range of `a2` allowed by the archimedean condition for a fixed `a1`, if nonempty.
pub fn a2_window(q: &BigInt, a1: &BigInt) -> Option<(BigInt, BigInt)> {
    let a1sq = a1 * a1;
    let two_q = BigInt::from(2) * q;
    // a2 + 2q = t with t >= 1 and t^2 > 4 a1^2 q, i.e. t >= isqrt(4 a1^2 q) + 1.
    let t_min = (BigInt::from(4) * &a1sq * q).sqrt() + 1;
    let lo = t_min - &two_q;
    // 4 a2 < a1^2 + 8q
    let hi = (a1sq + BigInt::from(8) * q - BigInt::one()).div_floor(&BigInt::from(4));
    (lo <= hi).then_some((lo, hi))
}

/// Largest `|a1|` with `a1^2 < 16 q`.
pub fn a1_bound(q: &BigInt) -> BigInt {
    (BigInt::from(16) * q - BigInt::one()).sqrt()
}

/// Every pair in the archimedean region plus the exceptional pairs, classified,
/// sorted by `(a1, a2)`.
pub fn enumerate_isogeny_classes(q: &PrimePower) -> Vec<IsogenyClassEntry> {
    let bound = a1_bound(q.q());
    let rows: Vec<BigInt> = num_iter(&-&bound, &bound);
    let mut entries: Vec<IsogenyClassEntry> = rows
        .par_iter()
        .flat_map_iter(|a1| {
            let window = a2_window(q.q(), a1);
            let a2s = window.map(|(lo, hi)| num_iter(&lo, &hi)).unwrap_or_default();
            a2s.into_iter().map(move |a2| IsogenyClassEntry {
                classification: ruck_classify(q, a1, &a2),
                a1: a1.clone(),
                a2,
            })
        })
        .collect();
    for (a1, a2, _) in exceptional_pairs(q) {
        let classification = ruck_classify(q, &a1, &a2);
        entries.push(IsogenyClassEntry { a1, a2, classification });
    }
    entries.sort_by(|x, y| (&x.a1, &x.a2).cmp(&(&y.a1, &y.a2)));
    entries.dedup_by(|x, y| x.a1 == y.a1 && x.a2 == y.a2);
    entries
}

/// Inclusive integer range as a vector.
pub(crate) fn num_iter(lo: &BigInt, hi: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut x = lo.clone();
    while x <= *hi {
        out.push(x.clone());
        x += 1u32;
    }
    out
}

/// `(sqrt(q) - 1)^4 <= n <= (sqrt(q) + 1)^4`, decided exactly.
///
/// `(sqrt(q) +- 1)^4 = A +- B sqrt(q)` with `A = q^2 + 6q + 1`, `B = 4(q + 1)`.
pub fn within_hasse_weil(q: &BigInt, n: &BigInt) -> bool {
    let a = q * q + BigInt::from(6) * q + 1;
    let b = BigInt::from(4) * (q + 1);
    let below_upper = sign_int_surd(&(&a - n), &b, q).is_ge();
    let above_lower = sign_int_surd(&(n - &a), &b, q).is_ge();
    below_upper && above_lower
}
