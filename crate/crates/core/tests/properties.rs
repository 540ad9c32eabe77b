use std::cmp::Ordering;

use abelsurf_core::bounds::{
    degenerate_k_identity, k_in_interval, lemma41_check, prop31_bound_check, radicand, BoundStatus,
};
use abelsurf_core::equidist::{BoxSample, TBox};
use abelsurf_core::intarith::{
    exact_sqrt, is_prime_power, isqrt, sqrt_dist, PrimePower, QuadraticSurd,
};
use abelsurf_core::occurrence::{congruence_criterion, divisor_chains, find_witnesses, GroupShape};
use abelsurf_core::polygon::{
    hodge_polygon, lies_on_or_above, newton_polygon, rybakov_accepts, shifted_coefficients, EllGroupProfile,
};
use abelsurf_core::weil::{
    detect_exceptional, enumerate_isogeny_classes, exceptional_pairs, in_weil_region, ruck_classify,
    within_hasse_weil, ClassKind,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn b(v: i64) -> BigInt {
    BigInt::from(v)
}

fn prime_power() -> impl Strategy<Value = PrimePower> {
    (2i64..2000).prop_filter_map("prime power", |q| is_prime_power(&b(q)).ok())
}

fn small_prime_power() -> impl Strategy<Value = PrimePower> {
    (2i64..=32).prop_filter_map("prime power", |q| is_prime_power(&b(q)).ok())
}

/// A field-simple class with `q <= 32`, chosen by index.
fn field_simple_class() -> impl Strategy<Value = (PrimePower, BigInt, BigInt)> {
    (small_prime_power(), any::<prop::sample::Index>()).prop_filter_map("has field-simple classes", |(q, i)| {
        let fs: Vec<_> = enumerate_isogeny_classes(&q)
            .into_iter()
            .filter(|e| e.classification.is_field_simple())
            .collect();
        if fs.is_empty() {
            return None;
        }
        let e = &fs[i.index(fs.len())];
        Some((q, e.a1.clone(), e.a2.clone()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn isqrt_brackets(n in 0u128..u128::MAX) {
        let n = BigInt::from(n);
        let s = isqrt(&n).unwrap();
        prop_assert!(&s * &s <= n);
        prop_assert!((&s + 1) * (&s + 1) > n);
    }

    #[test]
    fn sqrt_dist_at_most_half(m in 1u64..10_000_000_000) {
        let m = BigInt::from(m);
        let d = sqrt_dist(&m).unwrap();
        let half = BigRational::new(b(1), b(2));
        prop_assert_ne!(d.cmp_rational(&half), Ordering::Greater);
        prop_assert_ne!(d.signum(), Ordering::Less);
        prop_assert_eq!(d.signum() == Ordering::Equal, exact_sqrt(&m).is_some());
    }

    #[test]
    fn surd_order_is_total_and_consistent(
        a in -50i64..50, bb in -50i64..50, c in -50i64..50, d in -50i64..50, m in 2i64..40,
    ) {
        let x = QuadraticSurd::new(BigRational::from_integer(b(a)), BigRational::from_integer(b(bb)), b(m)).unwrap();
        let y = QuadraticSurd::new(BigRational::from_integer(b(c)), BigRational::from_integer(b(d)), b(m)).unwrap();
        let o = x.cmp(&y);
        prop_assert_eq!(o.reverse(), y.cmp(&x));
        prop_assert_eq!(o == Ordering::Equal, x == y);
        // (x - y) carries the same sign as the comparison.
        prop_assert_eq!((&x - &y).signum(), o);
    }

    #[test]
    fn region_symmetric_in_a1(q in prime_power(), a1 in -200i64..200, a2 in -4000i64..4000) {
        prop_assert_eq!(
            in_weil_region(q.q(), &b(a1), &b(a2)),
            in_weil_region(q.q(), &b(-a1), &b(a2))
        );
    }

    #[test]
    fn exceptional_only_on_listed_pairs(q in prime_power(), a1 in -200i64..200, a2 in -4000i64..4000) {
        let listed = exceptional_pairs(&q).into_iter().any(|(x, y, _)| x == b(a1) && y == b(a2));
        prop_assert_eq!(detect_exceptional(&q, &b(a1), &b(a2)).is_some(), listed);
        if listed {
            prop_assert!(ruck_classify(&q, &b(a1), &b(a2)).kind().is_exceptional());
        }
    }

    #[test]
    fn field_simple_within_hasse_weil((q, a1, a2) in field_simple_class()) {
        let w = abelsurf_core::weil::WeilSurfacePolynomial::new(q.clone(), a1, a2);
        prop_assert!(within_hasse_weil(q.q(), &w.f_at_one()));
    }

    #[test]
    fn newton_polygon_shape((q, a1, a2) in field_simple_class(), ell in prop::sample::select(vec![2i64, 3, 5, 7, 11])) {
        let w = abelsurf_core::weil::WeilSurfacePolynomial::new(q, a1, a2);
        let c = shifted_coefficients(&w).unwrap();
        let np = newton_polygon(&c, &b(ell)).unwrap();
        let v = np.vertices();
        prop_assert_eq!(v.first().unwrap().0, 0);
        prop_assert_eq!(v.last().unwrap(), &(4, BigRational::zero()));
        // Every coefficient point lies on or above the hull.
        for (i, ci) in c.iter().enumerate() {
            if ci.is_zero() { continue; }
            let mut n = ci.clone();
            let mut e = 0i64;
            while (&n % b(ell)).is_zero() { n /= b(ell); e += 1; }
            prop_assert!(np.eval_at(i as i64).unwrap() <= BigRational::from_integer(b(e)));
        }
    }

    #[test]
    fn lies_on_or_above_matches_dense_sampling(
        (q, a1, a2) in field_simple_class(),
        ell in prop::sample::select(vec![2i64, 3, 5]),
        mut exps in prop::array::uniform4(0u64..4),
    ) {
        exps.sort_unstable();
        let w = abelsurf_core::weil::WeilSurfacePolynomial::new(q, a1, a2);
        let np = newton_polygon(&shifted_coefficients(&w).unwrap(), &b(ell)).unwrap();
        let hp = hodge_polygon(&EllGroupProfile::new(b(ell), exps).unwrap());
        let dense = (0..=32).all(|j| {
            let x = BigRational::new(b(j), b(8));
            np.eval(&x).unwrap() >= hp.eval(&x).unwrap()
        });
        prop_assert_eq!(lies_on_or_above(&np, &hp).unwrap(), dense);
    }

    #[test]
    fn congruence_iff_polygon((q, a1, a2) in field_simple_class()) {
        let w = abelsurf_core::weil::WeilSurfacePolynomial::new(q, a1, a2);
        for shape in divisor_chains(&w.f_at_one()).unwrap() {
            prop_assert_eq!(congruence_criterion(&w, &shape).unwrap(), rybakov_accepts(&w, &shape).unwrap());
        }
    }

    #[test]
    fn divisor_chains_are_chains(n in 1u64..5000) {
        let shapes = divisor_chains(&BigInt::from(n)).unwrap();
        prop_assert!(!shapes.is_empty());
        for s in &shapes {
            prop_assert_eq!(s.order(), BigInt::from(n));
            let d = s.invariant_factors();
            for i in 0..3 {
                prop_assert!((&d[i + 1] % &d[i]).is_zero());
            }
            prop_assert_eq!(&GroupShape::from_invariant_factors(&d).unwrap(), s);
        }
        let mut sorted = shapes.clone();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), shapes.len());
    }

    #[test]
    fn witnesses_obey_congruence_interval_and_bound(n in 1u64..3000) {
        for shape in divisor_chains(&BigInt::from(n)).unwrap() {
            for w in find_witnesses(&shape).unwrap().witnesses {
                prop_assert_eq!(ruck_classify(&w.q, &w.a1, &w.a2).kind(), ClassKind::FieldSimple);
                prop_assert!(rybakov_accepts(&w.polynomial(), &shape).unwrap());
                let modulus = shape.n1() * shape.n1() * shape.n2();
                let shifted: BigInt = &w.a1 + BigInt::from(2) * (w.q.q() + BigInt::one());
                prop_assert!((&shifted % &modulus).is_zero());
                let m = radicand(shape.n2(), shape.n3(), shape.n4());
                prop_assert!(k_in_interval(w.q.q(), &m, &(shifted / &modulus)));
                prop_assert_eq!(prop31_bound_check(&shape).status, BoundStatus::Holds);
            }
        }
    }

    #[test]
    fn lemma41_holds(m in 2u64..1_000_000_000_000) {
        let m = BigInt::from(m);
        prop_assume!(exact_sqrt(&m).is_none());
        prop_assert!(lemma41_check(&m).unwrap());
    }

    #[test]
    fn degenerate_identity_vanishes(
        q in prime_power(), n1 in 1u64..100, a in 1u64..20, bb in 1u64..10, c in 1u64..10, n3 in 1u64..10,
    ) {
        let shape = GroupShape::from_u64([n1, a * bb * bb, n3, a * c * c]).unwrap();
        prop_assert_eq!(degenerate_k_identity(&q, &shape).unwrap(), BigInt::zero());
    }

    #[test]
    fn box_counts_and_sums(n2 in 1u64..12, n3 in 1u64..6, n4 in 1u64..12, k in 1i64..40, cut in 1i64..10) {
        let tb = TBox::new(n2, n3, n4).unwrap();
        let s = BoxSample::new(tb).unwrap();
        let t = tb.cardinality() as u64;
        prop_assert_eq!(s.len(), t);
        let zero = BigRational::zero();
        let one = BigRational::one();
        prop_assert_eq!(s.z_count(&zero, &one).unwrap(), t);
        // Splitting at an interior rational point never double-counts an irrational value.
        let mid = BigRational::new(b(cut), b(10));
        prop_assert_eq!(
            s.z_count(&zero, &mid).unwrap() + s.z_count(&mid, &one).unwrap(),
            t
        );
        let e = s.weyl_sum(k);
        prop_assert!(e.abs() <= t as f64 + e.abs_error_bound);
        let e0 = s.weyl_sum(0);
        prop_assert_eq!((e0.re, e0.im), (t as f64, 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Plant a class at a larger q and make sure the search recovers it for every
    /// accepted shape, including the non-cyclic ones.
    #[test]
    fn search_recovers_planted_classes(
        q in (100i64..4000).prop_filter_map("prime power", |q| is_prime_power(&b(q)).ok()),
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
    ) {
        use abelsurf_core::weil::{a1_bound, a2_window, WeilSurfacePolynomial};
        let bound = a1_bound(q.q());
        let span = 2 * i64::try_from(&bound).unwrap() + 1;
        let a1 = b(i.index(span as usize) as i64) - &bound;
        // The window can be empty at the edge |a1| = bound.
        let window = a2_window(q.q(), &a1);
        prop_assume!(window.is_some());
        let (lo, hi) = window.unwrap();
        let width = i64::try_from(&hi - &lo).unwrap() + 1;
        let a2 = &lo + b(j.index(width as usize) as i64);
        prop_assume!(ruck_classify(&q, &a1, &a2).is_field_simple());
        let w = WeilSurfacePolynomial::new(q.clone(), a1.clone(), a2.clone());
        for shape in divisor_chains(&w.f_at_one()).unwrap() {
            if !congruence_criterion(&w, &shape).unwrap() {
                continue;
            }
            let found = find_witnesses(&shape).unwrap();
            prop_assert!(
                found.witnesses.iter().any(|x| x.q == q && x.a1 == a1 && x.a2 == a2),
                "{shape} missing q={q} a1={a1} a2={a2}"
            );
        }
    }
}
