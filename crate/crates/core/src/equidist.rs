//! Fractional parts of `2 n3 sqrt(n2 n4)` over boxes, their Weyl sums, the
//! Erdős–Turán check, and the density experiment.
//!
//! Fractional parts are kept as 128-bit fixed point (error below `2^-128`);
//! interval membership is decided exactly in integers.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::bounds::radicand;
use crate::error::{Error, Result};
use crate::intarith::sqrt_dist;
use crate::occurrence::{find_witnesses, GroupShape};

/// Largest box (in points) accepted by the sum and count routines.
pub const MAX_BOX_POINTS: u64 = 2_000_000;
/// Largest quadruple box accepted by [`density_experiment`].
pub const MAX_DENSITY_POINTS: u64 = 100_000;
/// Exponent used in the first predictor's `(N2 N4)^(1/2 + eps)` terms.
pub const PREDICTOR_EPSILON: f64 = 0.05;

/// Per-term error of one `e(theta)` evaluation, generously rounded up.
const TERM_ERROR: f64 = 1.0 / (1u64 << 49) as f64;
/// Points per reduction chunk; fixed so that results do not depend on the thread count.
const CHUNK: usize = 4096;

/// `{(n2, n3, n4) : N_j <= n_j <= 2 N_j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TBox {
    n2: u64,
    n3: u64,
    n4: u64,
}

impl TBox {
    pub fn new(n2: u64, n3: u64, n4: u64) -> Result<Self> {
        if n2 == 0 || n3 == 0 || n4 == 0 {
            return Err(Error::InvalidArgument(format!("box bounds must be positive, got ({n2},{n3},{n4})")));
        }
        // 2N stays far from overflow and m = 4 n3^2 n2 n4 fits in u128.
        if [n2, n3, n4].iter().any(|&n| n > 1 << 30) {
            return Err(Error::InvalidArgument("box bound above 2^30".into()));
        }
        Ok(TBox { n2, n3, n4 })
    }

    pub fn bounds(&self) -> (u64, u64, u64) {
        (self.n2, self.n3, self.n4)
    }

    /// `#T = (N2 + 1)(N3 + 1)(N4 + 1)`.
    pub fn cardinality(&self) -> u128 {
        (self.n2 as u128 + 1) * (self.n3 as u128 + 1) * (self.n4 as u128 + 1)
    }

    fn check_cap(&self) -> Result<()> {
        let size = self.cardinality();
        if size > MAX_BOX_POINTS as u128 {
            return Err(Error::BoxTooLarge { size: BigInt::from(size), cap: MAX_BOX_POINTS });
        }
        Ok(())
    }

    /// Points in lexicographic `(n2, n3, n4)` order.
    pub fn points(&self) -> impl Iterator<Item = (u64, u64, u64)> + '_ {
        (self.n2..=2 * self.n2).flat_map(move |a| {
            (self.n3..=2 * self.n3).flat_map(move |b| (self.n4..=2 * self.n4).map(move |c| (a, b, c)))
        })
    }
}

/// `{sqrt(m)}` in 128-bit fixed point, with the integer part kept for exact comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FracValue {
    m: u128,
    floor: u128,
    fixed: u128,
}

impl FracValue {
    pub fn radicand(&self) -> u128 {
        self.m
    }

    /// `floor({sqrt(m)} 2^128)`.
    pub fn fixed(&self) -> u128 {
        self.fixed
    }

    pub fn is_zero(&self) -> bool {
        self.floor * self.floor == self.m
    }

    pub fn to_f64(&self) -> f64 {
        self.fixed as f64 / 2f64.powi(128)
    }

    /// `{sqrt(m)} >= r` for rational `r` in `[0, 1]`, exactly.
    fn at_least(&self, r: &BigRational) -> bool {
        if self.is_zero() {
            return !r.is_positive();
        }
        // sqrt(m) >= s + p/d  <=>  m d^2 >= (s d + p)^2
        let (p, d) = (r.numer(), r.denom());
        let lhs = BigInt::from(self.m) * d * d;
        let t = BigInt::from(self.floor) * d + p;
        lhs >= &t * &t
    }

    /// `{sqrt(m)} <= r` for rational `r` in `[0, 1]`, exactly.
    fn at_most(&self, r: &BigRational) -> bool {
        if self.is_zero() {
            return !r.is_negative();
        }
        let (p, d) = (r.numer(), r.denom());
        let lhs = BigInt::from(self.m) * d * d;
        let t = BigInt::from(self.floor) * d + p;
        lhs <= &t * &t
    }
}

/// Fractional part of `2 n3 sqrt(n2 n4) = sqrt(4 n3^2 n2 n4)`.
pub fn frac_value(n2: u64, n3: u64, n4: u64) -> FracValue {
    let m = 4 * (n3 as u128) * (n3 as u128) * (n2 as u128) * (n4 as u128);
    let scaled: BigInt = BigInt::from(m) << 256u32;
    let root = scaled.sqrt();
    let floor = (&root >> 128u32).to_u128().expect("sqrt(m) < 2^64");
    let low: BigInt = &root - (BigInt::from(floor) << 128u32);
    FracValue { m, floor, fixed: low.to_u128().expect("below 2^128") }
}

/// Fractional parts over a box, computed once and reused across `k`.
#[derive(Debug, Clone)]
pub struct BoxSample {
    tbox: TBox,
    fracs: Vec<FracValue>,
}

impl BoxSample {
    pub fn new(tbox: TBox) -> Result<Self> {
        tbox.check_cap()?;
        let pts: Vec<(u64, u64, u64)> = tbox.points().collect();
        let fracs = pts.par_iter().map(|&(a, b, c)| frac_value(a, b, c)).collect();
        Ok(BoxSample { tbox, fracs })
    }

    pub fn tbox(&self) -> TBox {
        self.tbox
    }

    pub fn fracs(&self) -> &[FracValue] {
        &self.fracs
    }

    pub fn len(&self) -> u64 {
        self.fracs.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.fracs.is_empty()
    }

    /// Closed-interval count `#{alpha <= {f} <= beta}`.
    pub fn z_count(&self, alpha: &BigRational, beta: &BigRational) -> Result<u64> {
        check_interval(alpha, beta)?;
        Ok(self
            .fracs
            .par_iter()
            .filter(|f| f.at_least(alpha) && f.at_most(beta))
            .count() as u64)
    }

    pub fn weyl_sum(&self, k: i64) -> WeylSumValue {
        let n = self.fracs.len();
        if k == 0 {
            return WeylSumValue { k, re: n as f64, im: 0.0, abs_error_bound: 0.0 };
        }
        let kk = k as i128 as u128;
        let partial: Vec<(Neumaier, Neumaier)> = self
            .fracs
            .par_chunks(CHUNK)
            .map(|chunk| {
                let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
                for f in chunk {
                    let phase = f.fixed.wrapping_mul(kk);
                    let theta = 2.0 * PI * (phase as f64 / 2f64.powi(128));
                    let (s, c) = theta.sin_cos();
                    re.add(c);
                    im.add(s);
                }
                (re, im)
            })
            .collect();
        let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
        for (r, i) in partial {
            re.add(r.value());
            im.add(i.value());
        }
        // Per term: 2^-128 |k| from the fixed point, plus f64 conversion, scaling and
        // libm sin/cos, all inside TERM_ERROR; compensated summation adds O(n eps^2).
        let abs_error_bound = n as f64 * 2.0 * TERM_ERROR;
        WeylSumValue { k, re: re.value(), im: im.value(), abs_error_bound }
    }
}

fn check_interval(alpha: &BigRational, beta: &BigRational) -> Result<()> {
    if alpha.is_negative() || *beta > BigRational::one() || alpha >= beta {
        return Err(Error::InvalidArgument(format!("need 0 <= alpha < beta <= 1, got [{alpha}, {beta}]")));
    }
    Ok(())
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `E_k = sum e(k f)` with a bound on the absolute error of `re + i im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylSumValue {
    pub k: i64,
    pub re: f64,
    pub im: f64,
    pub abs_error_bound: f64,
}

impl WeylSumValue {
    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

pub fn z_count(tbox: TBox, alpha: &BigRational, beta: &BigRational) -> Result<u64> {
    BoxSample::new(tbox)?.z_count(alpha, beta)
}

pub fn weyl_sum(tbox: TBox, k: i64) -> Result<WeylSumValue> {
    Ok(BoxSample::new(tbox)?.weyl_sum(k))
}

/// `1/(K+1) + min(beta - alpha, 1/(pi |k|))`, the bound on the Selberg coefficients.
pub fn selberg_coefficient_bound(k: i64, big_k: u64, width: f64) -> Result<f64> {
    if k == 0 || k.unsigned_abs() > big_k {
        return Err(Error::InvalidArgument(format!("need 0 < |k| <= K, got k = {k}, K = {big_k}")));
    }
    Ok(1.0 / (big_k as f64 + 1.0) + width.min(1.0 / (PI * k.unsigned_abs() as f64)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErdosTuranRecord {
    pub z_count: u64,
    pub cardinality: u64,
    pub lhs: f64,
    pub rhs: f64,
    /// Certified allowance for floating-point error in `rhs`.
    pub slack: f64,
    pub holds: bool,
}

/// `|Z - (beta - alpha) #T| <= #T/(K+1) + 2 sum_{k<=K} c_k |E_k|`.
pub fn erdos_turan_check(
    sample: &BoxSample,
    alpha: &BigRational,
    beta: &BigRational,
    big_k: u64,
) -> Result<ErdosTuranRecord> {
    if big_k == 0 {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    let sums: Vec<WeylSumValue> = (1..=big_k as i64).map(|k| sample.weyl_sum(k)).collect();
    erdos_turan_with_sums(sample, &sums, alpha, beta)
}

/// As [`erdos_turan_check`], with `sums[k - 1] = E_k` precomputed; `K = sums.len()`.
pub fn erdos_turan_with_sums(
    sample: &BoxSample,
    sums: &[WeylSumValue],
    alpha: &BigRational,
    beta: &BigRational,
) -> Result<ErdosTuranRecord> {
    let big_k = sums.len() as u64;
    if big_k == 0 {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    let z = sample.z_count(alpha, beta)?;
    let t = sample.len();
    let width = beta - alpha;
    let dev = BigRational::from_integer(BigInt::from(z)) - &width * BigRational::from_integer(BigInt::from(t));
    let lhs = dev.abs().to_f64().expect("finite");
    let width = width.to_f64().expect("finite");
    let mut rhs = Neumaier::default();
    rhs.add(t as f64 / (big_k as f64 + 1.0));
    let mut slack = 0.0;
    for (i, e) in sums.iter().enumerate() {
        let k = i as i64 + 1;
        if e.k != k {
            return Err(Error::InvalidArgument(format!("sums[{i}] holds E_{}, expected E_{k}", e.k)));
        }
        let c = selberg_coefficient_bound(k, big_k, width)?;
        rhs.add(2.0 * c * e.abs());
        slack += 2.0 * c * e.abs_error_bound;
    }
    let rhs = rhs.value();
    // Rounding in lhs, c_k and the products: a few ulps of numbers at most ~#T K.
    slack += (t as f64) * (big_k as f64 + 2.0) * 8.0 * f64::EPSILON;
    let holds = lhs <= rhs + slack;
    Ok(ErdosTuranRecord { z_count: z, cardinality: t, lhs, rhs, slack, holds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicRecord {
    pub big_k: u64,
    /// `sum_{k<=K} |E_k| / k`.
    pub sum: f64,
    pub abs_error_bound: f64,
    /// `(N2 N4)^(1/2+eps) N3 K + (N2 N4)^(1+eps) log 2K` with unit constant.
    pub predictor_first: f64,
    /// `K^(1/2) N3^(3/2) (N2 N4)^(3/4) + N3^(1/2) (N2 N4)^(3/4)` with unit constant.
    pub predictor_second: f64,
}

pub fn harmonic_weyl_sum(sample: &BoxSample, big_k: u64) -> Result<HarmonicRecord> {
    if big_k == 0 {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    let mut sum = Neumaier::default();
    let mut err = 0.0;
    for k in 1..=big_k {
        let e = sample.weyl_sum(k as i64);
        sum.add(e.abs() / k as f64);
        err += e.abs_error_bound / k as f64;
    }
    let (n2, n3, n4) = sample.tbox.bounds();
    let (p, n3, kf) = ((n2 as f64) * (n4 as f64), n3 as f64, big_k as f64);
    let eps = PREDICTOR_EPSILON;
    let predictor_first = p.powf(0.5 + eps) * n3 * kf + p.powf(1.0 + eps) * (2.0 * kf).ln();
    let predictor_second = kf.sqrt() * n3.powf(1.5) * p.powf(0.75) + n3.sqrt() * p.powf(0.75);
    Ok(HarmonicRecord { big_k, sum: sum.value(), abs_error_bound: err, predictor_first, predictor_second })
}

/// `max |Z/#T - (beta - alpha)|` over the given intervals, exactly.
pub fn grid_discrepancy(sample: &BoxSample, grid: &[(BigRational, BigRational)]) -> Result<BigRational> {
    let t = BigRational::from_integer(BigInt::from(sample.len()));
    let mut worst = BigRational::zero();
    for (a, b) in grid {
        let z = BigRational::from_integer(BigInt::from(sample.z_count(a, b)?));
        let d = (z / &t - (b - a)).abs();
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// All `(j/n, j'/n)` with `0 <= j < j' <= n`.
pub fn uniform_grid(n: u32) -> Vec<(BigRational, BigRational)> {
    let r = |j: u32| BigRational::new(BigInt::from(j), BigInt::from(n));
    (0..=n).flat_map(|j| ((j + 1)..=n).map(move |jj| (r(j), r(jj)))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRecord {
    pub total: u64,
    pub s_count: u64,
    pub s1_count: u64,
    pub s2_count: u64,
    /// `F^4 18^4 N3^2 N4 <= N1^4 N2` and `F >= 1`.
    pub f_bound_satisfied: bool,
    /// `S2` is empty, or the bound on `F` does not apply.
    pub consistent: bool,
}

/// Splits the field-simple shapes in `prod [N_j, 2N_j]` by `||2 n3 sqrt(n2 n4)|| <= 1/F`.
pub fn density_experiment(bounds: [u64; 4], f: &BigRational) -> Result<DensityRecord> {
    if bounds.contains(&0) {
        return Err(Error::InvalidArgument(format!("box bounds must be positive, got {bounds:?}")));
    }
    if !f.is_positive() {
        return Err(Error::InvalidArgument(format!("F must be positive, got {f}")));
    }
    let size: u128 = bounds.iter().map(|&n| n as u128 + 1).product();
    if size > MAX_DENSITY_POINTS as u128 {
        return Err(Error::BoxTooLarge { size: BigInt::from(size), cap: MAX_DENSITY_POINTS });
    }
    let [n1, n2, n3, n4] = bounds;
    let mut quads = Vec::with_capacity(size as usize);
    for a in n1..=2 * n1 {
        for b in n2..=2 * n2 {
            for c in n3..=2 * n3 {
                for d in n4..=2 * n4 {
                    quads.push([a, b, c, d]);
                }
            }
        }
    }
    let cutoff = f.recip();
    let flags: Vec<Option<bool>> = quads
        .par_iter()
        .map(|&q| -> Result<Option<bool>> {
            let shape = GroupShape::from_u64(q)?;
            if !find_witnesses(&shape)?.occurs_field_simple() {
                return Ok(None);
            }
            let m = radicand(shape.n2(), shape.n3(), shape.n4());
            let dist = sqrt_dist(&m)?;
            Ok(Some(dist.cmp_rational(&cutoff).is_le()))
        })
        .collect::<Result<_>>()?;
    let s_count = flags.iter().filter(|x| x.is_some()).count() as u64;
    let s1_count = flags.iter().filter(|x| **x == Some(true)).count() as u64;
    let s2_count = s_count - s1_count;
    let f4 = f * f * f * f;
    let lhs = f4 * BigRational::from_integer(BigInt::from(18u32).pow(4) * BigInt::from(n3).pow(2) * n4);
    let rhs = BigRational::from_integer(BigInt::from(n1).pow(4) * n2);
    let f_bound_satisfied = lhs <= rhs && *f >= BigRational::one();
    Ok(DensityRecord {
        total: quads.len() as u64,
        s_count,
        s1_count,
        s2_count,
        f_bound_satisfied,
        consistent: !f_bound_satisfied || s2_count == 0,
    })
}
