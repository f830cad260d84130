//! Randomized invariants: congruence and growth laws for the index
//! sequence, agreement of the two independent minimality decisions,
//! conjugacy invariance of the iterated residue, a closed form for small
//! iterates, and Newton polygon geometry.

use proptest::prelude::*;
use ramlab_core::censored::Rat;
use ramlab_core::ff::{ff_make, mult_order, FieldSpec};
use ramlab_core::normal::{characterize_mr, normalize};
use ramlab_core::polygon::newton_polygon;
use ramlab_core::ram::{is_minimally_ramified, lower_bound, ram_profile};
use ramlab_core::series::{comp_inverse, compose, iterate, Germ, Series};
use ramlab_core::valued::CensoredVal;
use std::sync::Arc;

fn field(p: u64) -> Arc<FieldSpec> {
    ff_make(p, 1, None).unwrap()
}

fn series(f: &Arc<FieldSpec>, coeffs: &[u64]) -> Series<ramlab_core::ff::FFElem> {
    Series::from_coeffs(coeffs.iter().map(|&v| f.from_int(v as i64)).collect(), true)
}

fn germ_strategy() -> impl Strategy<Value = (u64, Vec<u64>)> {
    prop_oneof![Just(2u64), Just(3), Just(5), Just(7)].prop_flat_map(|p| {
        (
            1..p,
            proptest::collection::vec(0..p, 2..7usize),
        )
            .prop_map(move |(c1, rest)| {
                let mut coeffs = vec![0, c1];
                coeffs.extend(rest);
                (p, coeffs)
            })
    })
}

/// Nonlinear germs only: an exactly linear tail gives infinite indices.
fn nonlinear(p: u64, coeffs: &[u64]) -> bool {
    coeffs.iter().skip(2).any(|&c| c % p != 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn index_sequence_obeys_congruence_and_growth_laws((p, coeffs) in germ_strategy()) {
        prop_assume!(nonlinear(p, &coeffs));
        let f = field(p);
        let g = Germ::new(series(&f, &coeffs)).unwrap();
        let q = g.q();
        let nmax = if p <= 3 { 2 } else { 1 };
        let profile = ram_profile(&g, nmax, None).unwrap();

        let mut prev: Option<u64> = None;
        for &(n, v) in &profile.entries {
            let b = lower_bound(q, p, n);
            if let Some(i) = v.exact_value() {
                prop_assert!(i >= b, "index {} below bound {} at n={}", i, b, n);
                if n == 0 {
                    prop_assert_eq!(i % q, 0, "q does not divide i_0");
                }
                if let Some(ip) = prev {
                    let m = q * p.pow(n);
                    prop_assert_eq!((i - ip) % m, 0, "congruence fails at n={}", n);
                    if ip % p == 0 {
                        prop_assert_eq!(i, p * ip, "p | i_(n-1) forces equality");
                    } else {
                        prop_assert!(i >= p * ip + q, "growth law fails at n={}", n);
                    }
                }
                prev = Some(i);
            } else {
                prev = None;
            }
        }
    }

    #[test]
    fn both_minimality_decisions_agree((p, coeffs) in germ_strategy()) {
        prop_assume!(nonlinear(p, &coeffs));
        let f = field(p);
        let g = Germ::new(series(&f, &coeffs)).unwrap();
        let by_bounds = is_minimally_ramified(&g).unwrap().verdict;
        let by_residue = characterize_mr(&g).unwrap().verdict;
        prop_assert_eq!(by_bounds, by_residue);
    }

    #[test]
    fn residue_survives_conjugation(
        (p, coeffs) in germ_strategy(),
        h_tail in proptest::collection::vec(0..7u64, 1..5usize),
    ) {
        prop_assume!(nonlinear(p, &coeffs));
        let f = field(p);
        let g = Germ::new(series(&f, &coeffs)).unwrap();
        let q = g.q() as usize;
        let trunc = 2 * q + 2;

        let mut hc = vec![0u64; 2 + h_tail.len()];
        hc[1] = 1;
        for (i, &v) in h_tail.iter().enumerate() {
            hc[2 + i] = v % p;
        }
        let h = series(&f, &hc).with_trunc(trunc).unwrap();
        let hinv = comp_inverse(&h).unwrap();
        let gs = g.series_at(trunc).unwrap();
        let conj = compose(&compose(&h, &gs).unwrap(), &hinv).unwrap();
        let gh = Germ::new(conj).unwrap();

        let a = normalize(&g, 2 * q + 1).unwrap().resit;
        let b = normalize(&gh, 2 * q + 1).unwrap().resit;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn small_iterates_match_the_closed_form(
        p in prop_oneof![Just(3u64), Just(7), Just(11)],
        gamma_pick in 0usize..8,
        a1 in 1u64..11,
        a2 in 0u64..11,
    ) {
        let f = field(p);
        // any multiplier of order q > 1 works; pick among the non-identity
        // elements
        let gammas: Vec<_> = f
            .elements()
            .filter(|x| !x.is_zero() && !x.is_one())
            .collect();
        let gamma = gammas[gamma_pick % gammas.len()].clone();
        let q = mult_order(&gamma).unwrap();
        let w = (2 * q + 2) as usize;

        let mut gc = vec![f.zero(); w];
        gc[1] = gamma.clone();
        gc[q as usize + 1] = gamma.mul(&f.from_int(a1 as i64));
        gc[2 * q as usize + 1] = gamma.mul(&f.from_int(a2 as i64));
        let g = Series::from_coeffs(gc, true);

        for ell in 1..=(2 * q) {
            let got = iterate(&g, ell).unwrap();
            let gl = gamma.pow(ell);
            let le = f.from_int(ell as i64);
            let mut want = vec![f.zero(); w];
            want[1] = gl.clone();
            want[q as usize + 1] = gl.mul(&le).mul(&f.from_int(a1 as i64));
            let binom = (q + 1) * ell * (ell - 1) / 2;
            let c = le.mul(&f.from_int(a2 as i64)).add(
                &f.from_int(binom as i64)
                    .mul(&f.from_int((a1 * a1) as i64)),
            );
            want[2 * q as usize + 1] = gl.mul(&c);
            prop_assert_eq!(got.coeffs(), &want[..], "l = {}", ell);
        }
    }

    #[test]
    fn composition_is_associative(
        p in prop_oneof![Just(2u64), Just(5)],
        a in proptest::collection::vec(0..5u64, 4..8usize),
        b in proptest::collection::vec(0..5u64, 4..8usize),
        c in proptest::collection::vec(0..5u64, 4..8usize),
    ) {
        let f = field(p);
        let trunc = 8;
        let mk = |v: &[u64]| {
            let mut coeffs = vec![0];
            coeffs.extend_from_slice(v);
            series(&f, &coeffs).with_trunc(trunc).unwrap()
        };
        let (sa, sb, sc) = (mk(&a), mk(&b), mk(&c));
        let left = compose(&compose(&sa, &sb).unwrap(), &sc).unwrap();
        let right = compose(&sa, &compose(&sb, &sc).unwrap()).unwrap();
        prop_assert_eq!(left.coeffs(), right.coeffs());
    }

    #[test]
    fn iterates_compose_additively(
        (p, coeffs) in germ_strategy(),
        m in 1usize..4,
        n in 1usize..4,
    ) {
        let f = field(p);
        let s = series(&f, &coeffs).with_trunc(10).unwrap();
        let a = iterate(&s, m as u64).unwrap();
        let b = iterate(&s, n as u64).unwrap();
        let combined = compose(&a, &b).unwrap();
        let direct = iterate(&s, (m + n) as u64).unwrap();
        prop_assert_eq!(combined.coeffs(), direct.coeffs());
    }

    #[test]
    fn polygon_lies_under_all_points(
        vals in proptest::collection::vec(0i64..30, 2..12usize),
        z_order in 0usize..3,
    ) {
        let mut v: Vec<CensoredVal> = Vec::new();
        for _ in 0..z_order {
            v.push(CensoredVal::InfiniteZero);
        }
        v.extend(vals.iter().map(|&x| CensoredVal::Exact(x)));
        let pgn = newton_polygon(&v).unwrap();

        prop_assert_eq!(pgn.z_order(), z_order as u64);
        prop_assert_eq!(pgn.source_degree(), (v.len() - 1) as u64);

        // slopes strictly increase and spans tile [z_order, degree]
        let segs = pgn.segments();
        for w in segs.windows(2) {
            prop_assert!(w[0].slope < w[1].slope);
        }
        let span: u64 = segs.iter().map(|s| s.len).sum();
        prop_assert_eq!(span, (vals.len() - 1) as u64);

        // every point sits on or above the hull, reconstructed by walking
        // the segments
        let mut x = z_order as i64;
        let mut y = Rat::new(vals[0] as i64, 1);
        let mut hull = vec![(x, y)];
        for s in segs {
            x += s.len as i64;
            y += s.slope * Rat::new(s.len as i64, 1);
            hull.push((x, y));
        }
        for (i, &val) in vals.iter().enumerate() {
            let px = (z_order + i) as i64;
            let py = Rat::new(val, 1);
            let seg = hull.windows(2).find(|w| w[0].0 <= px && px <= w[1].0).unwrap();
            let (x0, y0) = seg[0];
            let (x1, y1) = seg[1];
            let t = Rat::new(px - x0, 1);
            let dx = Rat::new(x1 - x0, 1);
            let height = y0 + (y1 - y0) * t / dx;
            prop_assert!(py >= height, "point {} dips under the hull", i);
        }
    }
}
