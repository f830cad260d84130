//! Full cycle reports against independently computed polygon data, plus a
//! randomized coherence sweep.

use proptest::prelude::*;
use ramlab_core::censored::{CensoredNat, Rat};
use ramlab_core::cycles::{
    cycle_report, frobenius_power_report, CycleOptions, LevelVerdict, OKPoly, Simplicity,
};
use ramlab_core::ff::{ff_make, FieldSpec};
use ramlab_core::valued::{bound_valuation, FPoly, PadicScalar, RatFun, ValuedScalar};
use std::sync::Arc;

fn rational(field: &Arc<FieldSpec>, t_coeffs: &[i64]) -> ValuedScalar {
    let c = t_coeffs.iter().map(|&v| field.from_int(v)).collect();
    ValuedScalar::Rational(RatFun::from_poly(FPoly::from_coeffs(field, c)))
}

#[test]
fn quadratic_over_f3_is_optimal_at_three_levels() {
    let f3 = ff_make(3, 1, None).unwrap();
    let lam = rational(&f3, &[1, 1]);
    let zero = rational(&f3, &[]);
    let map = OKPoly::new(vec![zero, lam.clone(), lam.clone()]);

    let opts = CycleOptions {
        nmax: 2,
        ..CycleOptions::default()
    };
    let report = cycle_report(&map, &opts).unwrap();
    assert_eq!((report.p, report.q), (3, 1));
    assert!(!report.degenerate_linear);

    let idx: Vec<u64> = report
        .reduction_profile
        .iter()
        .map(|&(_, v)| v.exact_value().unwrap())
        .collect();
    assert_eq!(idx, vec![1, 4, 13]);

    // level 0: one point at valuation 1
    let l0 = &report.levels[0];
    assert_eq!(l0.period, 1);
    assert_eq!(l0.increment, Some(CensoredNat::Exact(1)));
    assert_eq!(l0.bound_val, Some(Rat::new(1, 1)));
    assert_eq!(l0.new_mass, vec![(Rat::new(1, 1), 1)]);
    assert_eq!(l0.verdict, LevelVerdict::Optimal);
    assert_eq!(l0.simplicity, Simplicity::Simple("exact-gcd"));

    // level 1: iterate degree 8, polygon gains three points at 2/3
    let l1 = &report.levels[1];
    assert_eq!(l1.period, 3);
    let pgn = l1.polygon.as_ref().unwrap();
    assert_eq!(pgn.source_degree(), 8);
    assert_eq!(pgn.z_order(), 1);
    assert_eq!(pgn.positive_mass(), 5);
    assert_eq!(
        pgn.positive_vals(),
        vec![(Rat::new(1, 1), 1), (Rat::new(2, 3), 3)]
    );
    assert_eq!(l1.increment, Some(CensoredNat::Exact(3)));
    assert_eq!(l1.bound_val, Some(Rat::new(2, 3)));
    assert_eq!(l1.new_mass, vec![(Rat::new(2, 3), 3)]);
    assert_eq!(l1.verdict, LevelVerdict::Optimal);
    assert_eq!(l1.simplicity, Simplicity::Simple("exact-gcd"));

    // level 2: degree 512, certified by specialization
    let l2 = &report.levels[2];
    assert_eq!(l2.period, 9);
    let pgn = l2.polygon.as_ref().unwrap();
    assert_eq!(pgn.source_degree(), 512);
    assert_eq!(pgn.positive_mass(), 14);
    assert_eq!(pgn.mass_at(Rat::new(2, 3)), 12);
    assert_eq!(l2.increment, Some(CensoredNat::Exact(9)));
    assert_eq!(l2.bound_val, Some(Rat::new(2, 3)));
    assert_eq!(l2.new_mass, vec![(Rat::new(2, 3), 9)]);
    assert_eq!(l2.verdict, LevelVerdict::Optimal);
    assert_eq!(l2.simplicity, Simplicity::Simple("specialized-gcd"));
}

#[test]
fn specialization_is_deterministic_per_seed() {
    let f3 = ff_make(3, 1, None).unwrap();
    let lam = rational(&f3, &[1, 1]);
    let zero = rational(&f3, &[]);
    let map = OKPoly::new(vec![zero, lam.clone(), lam.clone()]);
    // forcing every gcd through the specialization tier exercises the
    // seeded sampling on a small level
    let opts = CycleOptions {
        nmax: 1,
        seed: 42,
        exact_gcd_max_deg: 0,
        ..CycleOptions::default()
    };
    let a = cycle_report(&map, &opts).unwrap();
    let b = cycle_report(&map, &opts).unwrap();
    assert_eq!(a.levels[1].simplicity, Simplicity::Simple("specialized-gcd"));
    assert_eq!(b.levels[1].simplicity, Simplicity::Simple("specialized-gcd"));
    assert_eq!(a.levels[1].verdict, LevelVerdict::Optimal);
    assert_eq!(b.levels[1].verdict, LevelVerdict::Optimal);
}

#[test]
fn padic_multiplier_report() {
    // lambda = 1 + p over the 3-adic integers at precision 12
    let lam = ValuedScalar::Padic(PadicScalar::new(3, 12, 4).unwrap());
    let zero = ValuedScalar::Padic(PadicScalar::new(3, 12, 0).unwrap());
    let map = OKPoly::new(vec![zero, lam.clone(), lam.clone()]);

    assert_eq!(bound_valuation(&lam, 1, 0).unwrap(), Rat::new(1, 1));
    assert_eq!(bound_valuation(&lam, 1, 1).unwrap(), Rat::new(1, 3));
    assert_eq!(bound_valuation(&lam, 1, 2).unwrap(), Rat::new(1, 9));
    assert_eq!(bound_valuation(&lam, 1, 3).unwrap(), Rat::new(1, 27));

    let opts = CycleOptions {
        nmax: 1,
        ..CycleOptions::default()
    };
    let report = cycle_report(&map, &opts).unwrap();
    assert_eq!((report.p, report.q), (3, 1));
    let idx: Vec<u64> = report
        .reduction_profile
        .iter()
        .map(|&(_, v)| v.exact_value().unwrap())
        .collect();
    assert_eq!(idx, vec![1, 4]);

    // polygons and increments are exact, but simplicity cannot be
    // certified in finite precision, so no level is called optimal
    let l1 = &report.levels[1];
    assert_eq!(l1.bound_val, Some(Rat::new(1, 3)));
    assert_eq!(l1.new_mass, vec![(Rat::new(1, 3), 3)]);
    assert_eq!(l1.increment, Some(CensoredNat::Exact(3)));
    assert_eq!(l1.simplicity, Simplicity::Unchecked);
    assert_eq!(l1.verdict, LevelVerdict::Indeterminate);
    assert!(report
        .warnings
        .iter()
        .any(|w| w.contains("p-adic")));
}

#[test]
fn frobenius_family_over_f3() {
    let f3 = ff_make(3, 1, None).unwrap();
    let lam = rational(&f3, &[1, 1]);
    let s = OKPoly::new(vec![rational(&f3, &[1]), rational(&f3, &[1])]);
    let opts = CycleOptions {
        nmax: 3,
        ..CycleOptions::default()
    };
    let rep = frobenius_power_report(&s, &lam, &opts).unwrap();
    assert_eq!((rep.p, rep.q), (3, 1));
    assert_eq!(rep.i0, CensoredNat::Exact(3));

    let idx: Vec<u64> = rep
        .rows
        .iter()
        .map(|r| r.index.exact_value().unwrap())
        .collect();
    assert_eq!(idx, vec![3, 9, 27, 81]);
    for row in &rep.rows {
        assert_eq!(row.expected, Some(3u64.pow(row.n + 1)));
        assert_eq!(row.matches, Some(true));
    }
    // degree 64 at the first level is still exact; 4^9 blows the ceiling
    assert_eq!(rep.rows[1].mass_scaled, Some(true));
    assert_eq!(rep.rows[1].multiple_certified, Some(true));
    assert_eq!(rep.rows[2].mass_scaled, None);
}

#[test]
fn degree_ceiling_stops_deep_levels() {
    let f3 = ff_make(3, 1, None).unwrap();
    let lam = rational(&f3, &[1, 1]);
    let zero = rational(&f3, &[]);
    let map = OKPoly::new(vec![zero, lam.clone(), lam.clone()]);
    let opts = CycleOptions {
        nmax: 2,
        degree_ceiling: 60,
        ..CycleOptions::default()
    };
    // the n = 2 iterate has degree 512; the report must refuse before
    // doing any of that work
    match cycle_report(&map, &opts) {
        Err(ramlab_core::cycles::CyclesError::DegreeCeiling { degree, ceiling }) => {
            // first projected degree past the cap, before any composing
            assert_eq!(degree, 64);
            assert_eq!(ceiling, 60);
        }
        other => panic!("expected a degree ceiling refusal, got {:?}", other.map(|_| ())),
    }
}

fn exact_map_strategy() -> impl Strategy<Value = (u64, Vec<Vec<i64>>)> {
    prop_oneof![Just(2u64), Just(3)].prop_flat_map(|p| {
        proptest::collection::vec(
            proptest::collection::vec(0i64..(p as i64), 1..3usize),
            1..3usize,
        )
        .prop_map(move |tails| (p, tails))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // the internal cross-check (positive polygon mass == index + 1) makes
    // every successful report a theorem instance; this sweep hunts for
    // inputs where the two computations could drift apart
    #[test]
    fn reports_stay_coherent((p, tails) in exact_map_strategy()) {
        let f = ff_make(p, 1, None).unwrap();
        let lam = rational(&f, &[1, 1]);
        let zero = rational(&f, &[]);
        let mut c = vec![zero, lam];
        for tail in &tails {
            c.push(rational(&f, tail));
        }
        let map = OKPoly::new(c);
        if map.deg() < 1 {
            return Ok(());
        }
        let opts = CycleOptions { nmax: 1, ..CycleOptions::default() };
        let report = match cycle_report(&map, &opts) {
            Ok(r) => r,
            // shape or ceiling refusals are fine; internal inconsistency
            // is not
            Err(e) => {
                let msg = format!("{}", e);
                prop_assert!(!msg.contains("internal"), "{}", msg);
                return Ok(());
            }
        };
        for lvl in &report.levels {
            if lvl.verdict == LevelVerdict::Optimal {
                prop_assert!(matches!(lvl.simplicity, Simplicity::Simple(_)));
                prop_assert_eq!(
                    lvl.increment.and_then(|i| i.known_eq(lvl.target_increment)),
                    Some(true)
                );
                prop_assert!(!lvl.new_mass.is_empty());
            }
        }
    }
}
