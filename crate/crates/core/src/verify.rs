//! Verification sweeps. Each returns a [`SuiteReport`] listing every failing case;
//! results are ordered deterministically regardless of the thread pool size.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{
    degenerate_k_identity, k_in_interval, lemma41_check_u64, prop31_bound_check, radicand, thm1_threshold,
    BoundStatus,
};
use crate::equidist::{erdos_turan_with_sums, grid_discrepancy, uniform_grid, BoxSample, TBox, WeylSumValue};
use crate::error::Result;
use crate::intarith::{is_prime_power, PrimePower};
use crate::occurrence::{congruence_criterion, divisor_chains, find_witnesses, GroupShape, Witness};
use crate::polygon::rybakov_accepts;
use crate::weil::enumerate_isogeny_classes;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checked: u64,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &'static str) -> Self {
        SuiteReport { suite, checked: 0, failures: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }

    fn absorb(&mut self, checked: u64, failures: Vec<String>) {
        self.checked += checked;
        self.failures.extend(failures);
    }
}

pub fn prime_powers_up_to(max_q: u64) -> Vec<PrimePower> {
    (2..=max_q).filter_map(|q| is_prime_power(&BigInt::from(q)).ok()).collect()
}

/// Congruence criterion vs polygon criterion on every field-simple class with
/// `q <= max_q` and every shape of order `f(1)`.
pub fn equivalence(max_q: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("equivalence");
    let parts: Vec<(u64, Vec<String>)> = prime_powers_up_to(max_q)
        .par_iter()
        .map(|q| -> Result<(u64, Vec<String>)> {
            let mut checked = 0;
            let mut failures = Vec::new();
            for e in enumerate_isogeny_classes(q).iter().filter(|e| e.classification.is_field_simple()) {
                let w = e.polynomial(q);
                for shape in divisor_chains(&w.f_at_one())? {
                    checked += 1;
                    let c = congruence_criterion(&w, &shape)?;
                    let p = rybakov_accepts(&w, &shape)?;
                    if c != p {
                        failures.push(format!(
                            "q={q} a1={} a2={} shape={shape}: congruence={c} polygon={p}",
                            e.a1, e.a2
                        ));
                    }
                }
            }
            Ok((checked, failures))
        })
        .collect::<Result<_>>()?;
    for (c, f) in parts {
        report.absorb(c, f);
    }
    Ok(report)
}

/// The cyclic group of order `f(1)` is accepted by both criteria.
pub fn cyclic(max_q: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("cyclic");
    for q in prime_powers_up_to(max_q) {
        for e in enumerate_isogeny_classes(&q).iter().filter(|e| e.classification.is_field_simple()) {
            let w = e.polynomial(&q);
            let shape = GroupShape::cyclic(w.f_at_one())?;
            report.checked += 1;
            if !(congruence_criterion(&w, &shape)? && rybakov_accepts(&w, &shape)?) {
                report.failures.push(format!("q={q} a1={} a2={}: {shape} rejected", e.a1, e.a2));
            }
        }
    }
    Ok(report)
}

/// A shape together with one of its field-simple witnesses.
pub type ShapeWitness = (GroupShape, Witness);

/// No field-simple witness for `n1` in `[threshold, threshold + slack]`, `n2, n3, n4 <= n234_max`.
pub fn thm1(n234_max: u64, slack: u64) -> Result<(SuiteReport, Vec<ShapeWitness>)> {
    let mut report = SuiteReport::new("thm1");
    let mut shapes = Vec::new();
    for n2 in 1..=n234_max {
        for n3 in 1..=n234_max {
            for n4 in 1..=n234_max {
                let (b2, b3, b4) = (BigInt::from(n2), BigInt::from(n3), BigInt::from(n4));
                let t = thm1_threshold(&b2, &b3, &b4);
                for d in 0..=slack {
                    shapes.push(GroupShape::new([&t + d, b2.clone(), b3.clone(), b4.clone()])?);
                }
            }
        }
    }
    let found = witnesses_for(&shapes)?;
    report.checked = shapes.len() as u64;
    for (shape, w) in &found {
        report.failures.push(format!("{shape}: witness q={} a1={} a2={}", w.q, w.a1, w.a2));
    }
    Ok((report, found))
}

fn witnesses_for(shapes: &[GroupShape]) -> Result<Vec<ShapeWitness>> {
    let per: Vec<Vec<ShapeWitness>> = shapes
        .par_iter()
        .map(|s| -> Result<Vec<ShapeWitness>> {
            Ok(find_witnesses(s)?.witnesses.into_iter().map(|w| (s.clone(), w)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// Every witness of every shape with order `<= max_order` has
/// `a1 = -2(q + 1) mod n1^2 n2`, with `k = (a1 + 2(q + 1))/(n1^2 n2)` strictly inside its interval.
pub fn witness_congruence(max_order: u64) -> Result<(SuiteReport, Vec<ShapeWitness>)> {
    let mut report = SuiteReport::new("witness-congruence");
    let mut shapes = Vec::new();
    for n in 1..=max_order {
        shapes.extend(divisor_chains(&BigInt::from(n))?);
    }
    let found = witnesses_for(&shapes)?;
    for (shape, w) in &found {
        report.checked += 1;
        let modulus = shape.n1() * shape.n1() * shape.n2();
        let shifted: BigInt = &w.a1 + BigInt::from(2) * (w.q.q() + BigInt::one());
        if !shifted.is_multiple_of(&modulus) {
            report.failures.push(format!("{shape}: q={} a1={} not -2(q+1) mod {modulus}", w.q, w.a1));
            continue;
        }
        let k = shifted / &modulus;
        let m = radicand(shape.n2(), shape.n3(), shape.n4());
        if !k_in_interval(w.q.q(), &m, &k) {
            report.failures.push(format!("{shape}: q={} k={k} outside its interval", w.q));
        }
    }
    Ok((report, found))
}

/// The size bound holds on every given witness.
pub fn prop31(witnesses: &[ShapeWitness]) -> SuiteReport {
    let mut report = SuiteReport::new("prop31");
    let mut last: Option<&GroupShape> = None;
    for (shape, w) in witnesses {
        if last == Some(shape) {
            continue;
        }
        last = Some(shape);
        report.checked += 1;
        let v = prop31_bound_check(shape);
        if v.status != BoundStatus::Holds {
            report.failures.push(format!("{shape} (q={}): {}", w.q, v.status));
        }
    }
    report
}

/// `||sqrt(m)|| > 1/(3 sqrt(m))` for every non-square `m <= max_m`.
pub fn lemma41(max_m: u64) -> SuiteReport {
    let mut report = SuiteReport::new("lemma41");
    const CHUNK: u64 = 1 << 16;
    let results: Vec<(u64, Vec<String>)> = (0..max_m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut checked = 0;
            let mut failures = Vec::new();
            for m in (c * CHUNK + 1)..=((c + 1) * CHUNK).min(max_m) {
                match lemma41_check_u64(m) {
                    None => {}
                    Some(true) => checked += 1,
                    Some(false) => {
                        checked += 1;
                        failures.push(format!("m={m}"));
                    }
                }
            }
            (checked, failures)
        })
        .collect();
    for (c, f) in results {
        report.absorb(c, f);
    }
    report
}

/// Random shapes with `n2 = a b^2`, `n4 = a c^2` (so `n2 n4` is a square) and random
/// prime powers `q`; the degenerate discriminant must vanish.
pub fn degenerate(samples: u64, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("degenerate");
    let qs = prime_powers_up_to(10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let (a, b, c) = (rng.gen_range(1..=12u64), rng.gen_range(1..=6u64), rng.gen_range(1..=6u64));
        let n1 = rng.gen_range(1..=40u64);
        let n3 = rng.gen_range(1..=8u64);
        let shape = GroupShape::from_u64([n1, a * b * b, n3, a * c * c])?;
        let q = &qs[rng.gen_range(0..qs.len())];
        report.checked += 1;
        let v = degenerate_k_identity(q, &shape)?;
        if v != BigInt::from(0) {
            report.failures.push(format!("{shape} q={q}: {v}"));
        }
    }
    Ok(report)
}

/// The Erdős–Turán inequality on every box in `sizes^3`, every `K`, and every interval of the tenth grid.
pub fn erdos_turan(sizes: &[u64], ks: &[u64]) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("erdos-turan");
    let grid = uniform_grid(10);
    let k_max = ks.iter().copied().max().unwrap_or(0);
    let mut boxes = Vec::new();
    for &a in sizes {
        for &b in sizes {
            for &c in sizes {
                boxes.push(TBox::new(a, b, c)?);
            }
        }
    }
    let parts: Vec<(u64, Vec<String>)> = boxes
        .par_iter()
        .map(|&tb| -> Result<(u64, Vec<String>)> {
            let sample = BoxSample::new(tb)?;
            let sums: Vec<WeylSumValue> = (1..=k_max as i64).map(|k| sample.weyl_sum(k)).collect();
            let cap = sample.len() as f64 / 2f64.powi(40);
            let mut checked = 0;
            let mut failures = Vec::new();
            for &k in ks {
                for (a, b) in &grid {
                    checked += 1;
                    let rec = erdos_turan_with_sums(&sample, &sums[..k as usize], a, b)?;
                    if !rec.holds || rec.slack > cap {
                        failures.push(format!(
                            "box={:?} K={k} [{a},{b}]: lhs={} rhs={} slack={}",
                            tb.bounds(),
                            rec.lhs,
                            rec.rhs,
                            rec.slack
                        ));
                    }
                }
            }
            Ok((checked, failures))
        })
        .collect::<Result<_>>()?;
    for (c, f) in parts {
        report.absorb(c, f);
    }
    Ok(report)
}

/// Grid discrepancy of the boxes `(M, 1, M)`, in the order given.
pub fn discrepancy_trend(ms: &[u64]) -> Result<Vec<(u64, BigRational)>> {
    let grid = uniform_grid(10);
    ms.iter()
        .map(|&m| Ok((m, grid_discrepancy(&BoxSample::new(TBox::new(m, 1, m)?)?, &grid)?)))
        .collect()
}

/// Discrepancy is nonincreasing along `ms` and at most `tolerance` at the last size.
pub fn trend(ms: &[u64], tolerance: &BigRational) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("trend");
    let rows = discrepancy_trend(ms)?;
    for w in rows.windows(2) {
        report.checked += 1;
        if w[1].1 > w[0].1 {
            report.failures.push(format!("M={} -> M={}: {} > {}", w[0].0, w[1].0, w[1].1, w[0].1));
        }
    }
    if let Some((m, d)) = rows.last() {
        report.checked += 1;
        if d > tolerance {
            report.failures.push(format!("M={m}: discrepancy {} above {}", d.to_f64().unwrap_or(f64::NAN), tolerance));
        }
    }
    Ok(report)
}

/// `E_0 = #T` exactly and `E_{-k} = conj(E_k)` within the error bounds, on random boxes.
pub fn weyl_exact(boxes: u64, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("weyl-exact");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..boxes {
        let tb = TBox::new(rng.gen_range(1..=24), rng.gen_range(1..=24), rng.gen_range(1..=24))?;
        let s = BoxSample::new(tb)?;
        let e0 = s.weyl_sum(0);
        report.checked += 1;
        if e0.re != tb.cardinality() as f64 || e0.im != 0.0 {
            report.failures.push(format!("box={:?}: E_0 = {} + {}i", tb.bounds(), e0.re, e0.im));
        }
        for k in 1..=5 {
            let (p, n) = (s.weyl_sum(k), s.weyl_sum(-k));
            let tol = p.abs_error_bound + n.abs_error_bound;
            report.checked += 1;
            if (p.re - n.re).abs() > tol || (p.im + n.im).abs() > tol {
                report.failures.push(format!("box={:?} k={k}: not conjugate", tb.bounds()));
            }
        }
    }
    Ok(report)
}

/// `0.2` as the default trend tolerance.
pub fn default_trend_tolerance() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(5))
}
