//! Newton polygons of `f(1 - T)` and Hodge polygons of `ell`-primary groups.
//!
//! A group occurs in a field-simple isogeny class iff, for every prime `ell`,
//! the Newton polygon lies on or above the Hodge polygon of the `ell`-part.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::intarith::{valuation, PAdicValuation};
use crate::occurrence::GroupShape;
use crate::weil::{ruck_classify, WeilSurfacePolynomial};

/// Lower-convex piecewise-linear function on `[0, span]` with integer abscissae.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePolygon {
    vertices: Vec<(i64, BigRational)>,
}

impl LatticePolygon {
    /// Validates that abscissae start at 0, strictly increase, and slopes are nondecreasing.
    pub fn new(vertices: Vec<(i64, BigRational)>) -> Result<Self> {
        if vertices.first().map(|v| v.0) != Some(0) {
            return Err(Error::InvalidArgument("polygon must start at x = 0".into()));
        }
        if vertices.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument("abscissae must increase".into()));
        }
        let slopes: Vec<BigRational> = vertices
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / BigRational::from_integer(BigInt::from(w[1].0 - w[0].0)))
            .collect();
        if slopes.windows(2).any(|s| s[0] > s[1]) {
            return Err(Error::InvalidArgument("polygon is not lower convex".into()));
        }
        Ok(LatticePolygon { vertices })
    }

    pub fn vertices(&self) -> &[(i64, BigRational)] {
        &self.vertices
    }

    pub fn span(&self) -> i64 {
        self.vertices.last().map(|v| v.0).unwrap_or(0)
    }

    /// Height at `x`, by linear interpolation between neighbouring vertices.
    pub fn eval(&self, x: &BigRational) -> Option<BigRational> {
        let x0 = BigRational::from_integer(BigInt::from(self.vertices[0].0));
        if *x < x0 {
            return None;
        }
        for w in self.vertices.windows(2) {
            let (xa, ya) = (BigRational::from_integer(BigInt::from(w[0].0)), &w[0].1);
            let (xb, yb) = (BigRational::from_integer(BigInt::from(w[1].0)), &w[1].1);
            if *x <= xb {
                return Some(ya + (yb - ya) * (x - &xa) / (xb - xa));
            }
        }
        (self.vertices.len() == 1 && *x == x0).then(|| self.vertices[0].1.clone())
    }

    pub fn eval_at(&self, x: i64) -> Option<BigRational> {
        self.eval(&BigRational::from_integer(BigInt::from(x)))
    }
}

/// Exponents `m1 <= m2 <= m3 <= m4` of `G_ell = sum Z/ell^{m_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EllGroupProfile {
    ell: BigInt,
    exponents: [u64; 4],
}

impl EllGroupProfile {
    pub fn new(ell: BigInt, exponents: [u64; 4]) -> Result<Self> {
        if exponents.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(format!(
                "exponents {exponents:?} are not ascending"
            )));
        }
        Ok(EllGroupProfile { ell, exponents })
    }

    pub fn ell(&self) -> &BigInt {
        &self.ell
    }

    pub fn exponents(&self) -> [u64; 4] {
        self.exponents
    }
}

/// Coefficients of `f(1 - T)` in `T`, ascending.
pub fn shifted_coefficients(w: &WeilSurfacePolynomial) -> Result<[BigInt; 5]> {
    let q = w.q().q();
    let (a1, a2) = (w.a1(), w.a2());
    let q0 = w.f_at_one();
    if q0.is_zero() {
        return Err(Error::DegenerateShift);
    }
    let (two, three) = (BigInt::from(2), BigInt::from(3));
    let q1 = -(BigInt::from(4) + a1 * &three + a2 * &two + a1 * q);
    let q2 = BigInt::from(6) + a1 * &three + a2;
    let q3 = -(BigInt::from(4) + a1);
    Ok([q0, q1, q2, q3, BigInt::one()])
}

/// Lower convex hull of `(i, nu_ell(Q_i))` over nonzero coefficients.
pub fn newton_polygon(coeffs: &[BigInt], ell: &BigInt) -> Result<LatticePolygon> {
    if coeffs.first().is_none_or(|c| c.is_zero()) {
        return Err(Error::DegenerateShift);
    }
    if coeffs.last().is_none_or(|c| c.is_zero()) {
        return Err(Error::InvalidArgument("leading coefficient must be nonzero".into()));
    }
    let points: Vec<(i64, BigInt)> = coeffs
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match valuation(ell, c) {
            PAdicValuation::Finite(v) => Some((i as i64, BigInt::from(v))),
            PAdicValuation::Infinite => None,
        })
        .collect();
    let mut hull: Vec<(i64, BigInt)> = Vec::with_capacity(points.len());
    for p in points {
        while hull.len() >= 2 {
            let (o, a) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
            let cross = BigInt::from(a.0 - o.0) * (&p.1 - &o.1) - (&a.1 - &o.1) * BigInt::from(p.0 - o.0);
            if cross <= BigInt::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    LatticePolygon::new(hull.into_iter().map(|(x, y)| (x, BigRational::from_integer(y))).collect())
}

/// Vertices `(i, m_1 + ... + m_{4-i})` for `0 <= i < 4`, closed by `(4, 0)`.
pub fn hodge_polygon(g: &EllGroupProfile) -> LatticePolygon {
    let m = g.exponents;
    let vertices = (0..=4usize)
        .map(|i| {
            let h: u64 = m[..4 - i].iter().sum();
            (i as i64, BigRational::from_integer(BigInt::from(h)))
        })
        .collect();
    LatticePolygon::new(vertices).expect("ascending exponents give a convex polygon")
}

/// `np(x) >= hp(x)` on the whole span; checking the union of vertex abscissae suffices.
pub fn lies_on_or_above(np: &LatticePolygon, hp: &LatticePolygon) -> Result<bool> {
    if np.span() != hp.span() {
        return Err(Error::SpanMismatch(np.span(), hp.span()));
    }
    let mut xs: Vec<i64> = np.vertices.iter().chain(&hp.vertices).map(|v| v.0).collect();
    xs.sort_unstable();
    xs.dedup();
    Ok(xs.into_iter().all(|x| {
        let a = np.eval_at(x).expect("x inside span");
        let b = hp.eval_at(x).expect("x inside span");
        a >= b
    }))
}

/// Polygon test for a field-simple `w` against `shape`.
pub fn rybakov_accepts(w: &WeilSurfacePolynomial, shape: &GroupShape) -> Result<bool> {
    let class = ruck_classify(w.q(), w.a1(), w.a2());
    if !class.is_field_simple() {
        return Err(Error::Inapplicable(format!("class is {}, not field-simple", class.kind())));
    }
    let f1 = w.f_at_one();
    let order = shape.order();
    if f1 != order {
        return Err(Error::OrderMismatch { shape: order, f1 });
    }
    rybakov_accepts_unchecked(w, shape, &shape.primes()?)
}

/// Polygon test over the given primes, skipping the class and order checks.
pub(crate) fn rybakov_accepts_unchecked(
    w: &WeilSurfacePolynomial,
    shape: &GroupShape,
    primes: &[BigInt],
) -> Result<bool> {
    let coeffs = shifted_coefficients(w)?;
    for ell in primes {
        let np = newton_polygon(&coeffs, ell)?;
        let hp = hodge_polygon(&shape.ell_profile(ell));
        if !lies_on_or_above(&np, &hp)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intarith::PrimePower;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn r(v: i64) -> BigRational {
        BigRational::from_integer(b(v))
    }

    fn verts(p: &LatticePolygon) -> Vec<(i64, BigRational)> {
        p.vertices().to_vec()
    }

    fn sample() -> WeilSurfacePolynomial {
        WeilSurfacePolynomial::new(PrimePower::new(2).unwrap(), b(0), b(1))
    }

    #[test]
    fn shifted_examples() {
        assert_eq!(shifted_coefficients(&sample()).unwrap(), [b(6), b(-6), b(7), b(-4), b(1)]);
        // a1 = -4 kills the T^3 coefficient.
        let w = WeilSurfacePolynomial::new(PrimePower::new(5).unwrap(), b(-4), b(12));
        let c = shifted_coefficients(&w).unwrap();
        assert_eq!(c[3], b(0));
        assert_eq!(c[0], w.f_at_one());
        assert_eq!(c[4], b(1));
        // f(1) = a2 - 7 at q = 2, a1 = -4.
        let w = WeilSurfacePolynomial::new(PrimePower::new(2).unwrap(), b(-4), b(7));
        assert_eq!(w.f_at_one(), b(0));
        assert_eq!(shifted_coefficients(&w), Err(Error::DegenerateShift));
    }

    #[test]
    fn shifted_matches_direct_expansion() {
        // Oracle: evaluate f(1 - t) at several t and compare with the shifted polynomial.
        for (q, a1, a2) in [(2i64, 0i64, 1i64), (3, -2, 5), (7, 5, -3), (25, -9, 40)] {
            let w = WeilSurfacePolynomial::new(PrimePower::new(q).unwrap(), b(a1), b(a2));
            let f = w.coefficients();
            let g = shifted_coefficients(&w).unwrap();
            for t in -5i64..=5 {
                let x = b(1 - t);
                let fx = f.iter().rev().fold(b(0), |acc, c| acc * &x + c);
                let gx = g.iter().rev().fold(b(0), |acc, c| acc * b(t) + c);
                assert_eq!(fx, gx);
            }
        }
    }

    #[test]
    fn newton_examples() {
        let c = [b(6), b(-6), b(7), b(-4), b(1)];
        assert_eq!(verts(&newton_polygon(&c, &b(2)).unwrap()), vec![(0, r(1)), (2, r(0)), (4, r(0))]);
        assert_eq!(verts(&newton_polygon(&c, &b(5)).unwrap()), vec![(0, r(0)), (4, r(0))]);
        // Q1 = 0 is dropped; (2,1) and (3,1) are on or above the chord from (0,2) to (4,0).
        let c = [b(9), b(0), b(3), b(3), b(1)];
        let np = newton_polygon(&c, &b(3)).unwrap();
        assert_eq!(verts(&np), vec![(0, r(2)), (4, r(0))]);
        assert_eq!(np.eval_at(1), Some(BigRational::new(b(3), b(2))));
        let c = [b(27), b(0), b(1), b(3), b(1)];
        let np = newton_polygon(&c, &b(3)).unwrap();
        assert_eq!(verts(&np), vec![(0, r(3)), (2, r(0)), (4, r(0))]);
        assert_eq!(newton_polygon(&[b(0), b(1)], &b(2)), Err(Error::DegenerateShift));
    }

    #[test]
    fn hodge_examples() {
        let hp = hodge_polygon(&EllGroupProfile::new(b(2), [1, 1, 1, 1]).unwrap());
        assert_eq!(verts(&hp), vec![(0, r(4)), (1, r(3)), (2, r(2)), (3, r(1)), (4, r(0))]);
        let hp = hodge_polygon(&EllGroupProfile::new(b(2), [0, 0, 0, 5]).unwrap());
        assert_eq!(verts(&hp), vec![(0, r(5)), (1, r(0)), (2, r(0)), (3, r(0)), (4, r(0))]);
        let hp = hodge_polygon(&EllGroupProfile::new(b(3), [0, 0, 0, 0]).unwrap());
        assert!(hp.vertices().iter().all(|v| v.1.is_zero()));
        assert!(EllGroupProfile::new(b(2), [0, 0, 1, 0]).is_err());
    }

    #[test]
    fn comparison_examples() {
        let c = [b(6), b(-6), b(7), b(-4), b(1)];
        let np = newton_polygon(&c, &b(2)).unwrap();
        let cyclic = hodge_polygon(&EllGroupProfile::new(b(2), [0, 0, 0, 1]).unwrap());
        assert!(lies_on_or_above(&np, &cyclic).unwrap());
        let flat = hodge_polygon(&EllGroupProfile::new(b(2), [0, 0, 0, 0]).unwrap());
        assert!(lies_on_or_above(&np, &flat).unwrap());
        let np5 = newton_polygon(&c, &b(5)).unwrap();
        assert!(!lies_on_or_above(&np5, &cyclic).unwrap());
        let short = LatticePolygon::new(vec![(0, r(0)), (2, r(0))]).unwrap();
        assert_eq!(lies_on_or_above(&np, &short), Err(Error::SpanMismatch(4, 2)));
    }

    #[test]
    fn polygon_acceptance_examples() {
        let w = sample();
        let cyc = GroupShape::from_u64([1, 1, 1, 6]).unwrap();
        assert!(rybakov_accepts(&w, &cyc).unwrap());
        let wrong = GroupShape::from_u64([1, 1, 1, 7]).unwrap();
        assert!(matches!(rybakov_accepts(&w, &wrong), Err(Error::OrderMismatch { .. })));
        let rejected = WeilSurfacePolynomial::new(PrimePower::new(2).unwrap(), b(0), b(3));
        assert!(matches!(rybakov_accepts(&rejected, &cyc), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn polygon_shape_invariants() {
        for (q, a1, a2) in [(2i64, 0i64, 1i64), (3, 1, 2), (9, -3, 10), (27, 7, 30)] {
            let w = WeilSurfacePolynomial::new(PrimePower::new(q).unwrap(), b(a1), b(a2));
            let c = shifted_coefficients(&w).unwrap();
            for ell in [2i64, 3, 5, 7] {
                let np = newton_polygon(&c, &b(ell)).unwrap();
                let v = np.vertices();
                assert_eq!(v[0], (0, r(valuation(&b(ell), &c[0]).finite().unwrap() as i64)));
                assert_eq!(v.last().unwrap(), &(4, r(0)));
            }
        }
    }
}
