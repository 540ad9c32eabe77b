//! Squares and roots in the p-adic integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{split_off, valuation, PAdicValuation};
use crate::error::{Error, Result};

/// Residues up to this bound are scanned directly when looking for roots mod p.
const SCAN_LIMIT: u64 = 1 << 16;

/// Whether `x` is a square in `Z_p` (`p` prime).
///
/// `x = p^e u` with `p` not dividing `u` is a square iff `e` is even and `u`
/// is a square unit: a quadratic residue mod `p` for odd `p`, `u = 1 mod 8` for `p = 2`.
pub fn is_square_in_zp(p: &BigInt, x: &BigInt) -> bool {
    if x.is_zero() {
        return true;
    }
    let (e, u) = split_off(p, x);
    if e % 2 == 1 {
        return false;
    }
    if *p == BigInt::from(2) {
        return u.mod_floor(&BigInt::from(8)).is_one();
    }
    legendre(&u, p) == 1
}

/// Legendre symbol by Euler's criterion; `p` odd prime.
pub(crate) fn legendre(a: &BigInt, p: &BigInt) -> i8 {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return 0;
    }
    let e = (p - 1u32) >> 1;
    if a.modpow(&e, p).is_one() {
        1
    } else {
        -1
    }
}

/// Whether the monic integer polynomial `coeffs` (ascending) has a root in `Z_p`.
///
/// Residues that are simple roots mod `p` lift by Hensel's lemma. A multiple
/// root `rho` is refined by substituting `T = rho + p T'`, removing the
/// largest power of `p` dividing the content, and recursing. Inputs with zero
/// discriminant are rejected.
pub fn has_root_in_zp(p: &BigInt, coeffs: &[BigInt]) -> Result<bool> {
    let f = trim(coeffs.to_vec());
    if f.is_empty() || !f.last().is_some_and(|c| c.is_one()) {
        return Err(Error::InvalidArgument("polynomial must be monic".into()));
    }
    if f.len() == 1 {
        return Ok(false);
    }
    let disc = resultant_with_derivative(&f);
    if disc.is_zero() {
        return Err(Error::ZeroDiscriminant);
    }
    // Each refinement step consumes valuation of the discriminant; this is a generous guard.
    let budget = match valuation(p, &disc) {
        PAdicValuation::Finite(v) => 2 * v + 4,
        PAdicValuation::Infinite => unreachable!("nonzero discriminant"),
    };
    lift(p, &f, budget)
}

fn lift(p: &BigInt, g: &[BigInt], budget: u64) -> Result<bool> {
    let gbar = reduce(g, p);
    if degree(&gbar) < 1 {
        return Ok(false);
    }
    let dg = derivative(g);
    let singular = match residue_roots(&gbar, p) {
        ResidueRoots::HasSimple => return Ok(true),
        ResidueRoots::Roots(roots) => {
            let mut singular = Vec::new();
            for rho in roots {
                if !eval(&dg, &rho).mod_floor(p).is_zero() {
                    return Ok(true);
                }
                singular.push(rho);
            }
            singular
        }
    };
    if singular.is_empty() {
        return Ok(false);
    }
    if budget == 0 {
        return Err(Error::Inapplicable("p-adic refinement did not terminate".into()));
    }
    for rho in singular {
        let mut h = taylor_shift(g, &rho);
        let mut scale = BigInt::one();
        for c in h.iter_mut() {
            *c *= &scale;
            scale *= p;
        }
        let content = h.iter().filter(|c| !c.is_zero()).map(|c| valuation(p, c)).min();
        if let Some(PAdicValuation::Finite(e)) = content {
            let pe = num_traits::pow(p.clone(), e as usize);
            for c in h.iter_mut() {
                *c = &*c / &pe;
            }
        }
        if lift(p, &trim(h), budget - 1)? {
            return Ok(true);
        }
    }
    Ok(false)
}

enum ResidueRoots {
    /// At least one simple root exists; enumeration was skipped.
    HasSimple,
    Roots(Vec<BigInt>),
}

fn residue_roots(gbar: &[BigInt], p: &BigInt) -> ResidueRoots {
    if let Some(small) = p.to_u64().filter(|&v| v <= SCAN_LIMIT) {
        let roots = (0..small)
            .map(BigInt::from)
            .filter(|rho| eval(gbar, rho).mod_floor(p).is_zero())
            .collect();
        return ResidueRoots::Roots(roots);
    }
    let fp = FpPoly::new(gbar.to_vec(), p);
    let x_to_p = FpPoly::x().powmod(p, &fp);
    let split = fp.gcd(&x_to_p.sub(&FpPoly::x()));
    if split.degree() < 1 {
        return ResidueRoots::Roots(Vec::new());
    }
    let repeated = split.gcd(&fp.derivative());
    if repeated.degree() < split.degree() {
        return ResidueRoots::HasSimple;
    }
    ResidueRoots::Roots(repeated.roots_low_degree())
}

fn trim(mut f: Vec<BigInt>) -> Vec<BigInt> {
    while f.last().is_some_and(|c| c.is_zero()) {
        f.pop();
    }
    f
}

fn degree(f: &[BigInt]) -> isize {
    f.len() as isize - 1
}

fn reduce(f: &[BigInt], p: &BigInt) -> Vec<BigInt> {
    trim(f.iter().map(|c| c.mod_floor(p)).collect())
}

fn eval(f: &[BigInt], x: &BigInt) -> BigInt {
    f.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn derivative(f: &[BigInt]) -> Vec<BigInt> {
    f.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

/// Coefficients of `f(T + a)`.
fn taylor_shift(f: &[BigInt], a: &BigInt) -> Vec<BigInt> {
    let mut out = f.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = &out[j + 1] * a;
            out[j] += t;
        }
    }
    out
}

/// Resultant of `f` and `f'`, a nonzero multiple of the discriminant when `f` is square-free.
fn resultant_with_derivative(f: &[BigInt]) -> BigInt {
    let df = derivative(f);
    let m = f.len() - 1;
    let n = df.len() - 1;
    let size = m + n;
    if size == 0 {
        return BigInt::one();
    }
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(size);
    for shift in 0..n {
        rows.push(sylvester_row(f, shift, size));
    }
    for shift in 0..m {
        rows.push(sylvester_row(&df, shift, size));
    }
    determinant(rows).to_integer()
}

fn sylvester_row(poly: &[BigInt], shift: usize, size: usize) -> Vec<BigRational> {
    let mut row = vec![BigRational::zero(); size];
    for (i, c) in poly.iter().rev().enumerate() {
        row[shift + i] = BigRational::from_integer(c.clone());
    }
    row
}

fn determinant(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let pv = a[col][col].clone();
        det *= &pv;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &pv;
            let (top, bottom) = a.split_at_mut(r);
            for (x, y) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= &factor * y;
            }
        }
    }
    det
}

/// Dense polynomial over `F_p`, ascending coefficients, always trimmed.
#[derive(Debug, Clone, PartialEq)]
struct FpPoly {
    c: Vec<BigInt>,
    p: BigInt,
}

impl FpPoly {
    fn new(c: Vec<BigInt>, p: &BigInt) -> Self {
        FpPoly { c: reduce(&c, p), p: p.clone() }
    }

    fn x() -> Self {
        FpPoly { c: vec![BigInt::zero(), BigInt::one()], p: BigInt::zero() }
    }

    fn with_modulus(mut self, p: &BigInt) -> Self {
        self.p = p.clone();
        self.c = reduce(&self.c, p);
        self
    }

    fn degree(&self) -> isize {
        degree(&self.c)
    }

    fn inv(&self, a: &BigInt) -> BigInt {
        let e = &self.p - 2u32;
        a.modpow(&e, &self.p)
    }

    fn monic(&self) -> Self {
        match self.c.last() {
            None => self.clone(),
            Some(lead) => {
                let li = self.inv(lead);
                FpPoly::new(self.c.iter().map(|c| c * &li).collect(), &self.p)
            }
        }
    }

    fn sub(&self, other: &Self) -> Self {
        let n = self.c.len().max(other.c.len());
        let c = (0..n)
            .map(|i| {
                let a = self.c.get(i).cloned().unwrap_or_default();
                let b = other.c.get(i).cloned().unwrap_or_default();
                a - b
            })
            .collect();
        FpPoly::new(c, &self.p)
    }

    fn rem(&self, m: &Self) -> Self {
        let mut r = self.c.clone();
        let dm = m.c.len() - 1;
        let li = self.inv(m.c.last().expect("nonzero modulus"));
        while r.len() > dm {
            let lead = r.last().cloned().unwrap();
            if lead.is_zero() {
                r.pop();
                continue;
            }
            let f = (&lead * &li).mod_floor(&self.p);
            let off = r.len() - 1 - dm;
            for (i, mc) in m.c.iter().enumerate() {
                r[off + i] = (&r[off + i] - &f * mc).mod_floor(&self.p);
            }
            r.pop();
        }
        FpPoly::new(r, &self.p)
    }

    fn mulmod(&self, other: &Self, m: &Self) -> Self {
        let mut c = vec![BigInt::zero(); self.c.len() + other.c.len()];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in other.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        FpPoly::new(c, &self.p).rem(m)
    }

    /// `self^e mod m`.
    fn powmod(&self, e: &BigInt, m: &Self) -> Self {
        let base = self.clone().with_modulus(&m.p).rem(m);
        let mut acc = FpPoly::new(vec![BigInt::one()], &m.p);
        for i in (0..e.bits()).rev() {
            acc = acc.mulmod(&acc, m);
            if e.bit(i) {
                acc = acc.mulmod(&base, m);
            }
        }
        acc
    }

    fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone().with_modulus(&self.p);
        while b.degree() >= 0 {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    fn derivative(&self) -> Self {
        FpPoly::new(derivative(&self.c), &self.p)
    }

    /// Roots of a split polynomial of degree at most two.
    fn roots_low_degree(&self) -> Vec<BigInt> {
        let m = self.monic();
        let p = &self.p;
        match m.degree() {
            1 => vec![(-&m.c[0]).mod_floor(p)],
            2 => {
                // T^2 + bT + c, roots (-b +- sqrt(b^2 - 4c)) / 2
                let b = &m.c[1];
                let c = &m.c[0];
                let d = (b * b - BigInt::from(4) * c).mod_floor(p);
                let s = sqrt_mod(&d, p).expect("split quadratic has a square discriminant");
                let half = self.inv(&BigInt::from(2));
                let mut r = vec![
                    ((-b + &s) * &half).mod_floor(p),
                    ((-b - &s) * &half).mod_floor(p),
                ];
                r.sort();
                r.dedup();
                r
            }
            _ => Vec::new(),
        }
    }
}

/// Tonelli-Shanks square root modulo an odd prime.
fn sqrt_mod(a: &BigInt, p: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return Some(a);
    }
    if legendre(&a, p) != 1 {
        return None;
    }
    let one = BigInt::one();
    let pm1: BigInt = p - 1u32;
    let (s, q) = split_off(&BigInt::from(2), &pm1);
    let mut z = BigInt::from(2);
    while legendre(&z, p) != -1 {
        z += 1u32;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + 1u32) >> 1), p);
    while !t.is_one() {
        let mut i = 0u64;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = (&t2 * &t2) % p;
            i += 1;
        }
        let b = c.modpow(&(&one << (m - i - 1)), p);
        m = i;
        c = (&b * &b) % p;
        t = (&t * &c) % p;
        r = (&r * &b) % p;
    }
    Some(r)
}
