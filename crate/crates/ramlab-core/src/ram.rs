//! Lower ramification numbers `i_n(g^q)` of a germ, congruence/recursion
//! flags computed as runtime checks, and the minimally / almost-minimally
//! ramified decisions.
//!
//! All indices are computed on the q-th iterate of the germ, where q is the
//! multiplicative order of the multiplier; q is derived, never supplied.

use alloc::vec::Vec;
use core::fmt;

use crate::censored::{CensoredNat, TriBool};
use crate::ff::FFElem;
use crate::series::{compose, s_ord, s_sub, Germ, Series, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RamError {
    Series(SeriesError),
    /// The policy forbade growth and the window did not decide the query.
    TruncationTooSmall,
    /// Almost-minimal ramification is a characteristic-2 notion.
    CharMismatch { p: u64 },
}

impl fmt::Display for RamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RamError::Series(e) => write!(f, "{}", e),
            RamError::TruncationTooSmall => {
                write!(f, "truncation too small to decide and growth is disabled")
            }
            RamError::CharMismatch { p } => {
                write!(f, "almost minimal ramification needs characteristic 2, got p={}", p)
            }
        }
    }
}

impl From<SeriesError> for RamError {
    fn from(e: SeriesError) -> Self {
        RamError::Series(e)
    }
}

/// Truncation selection for a ramification query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncPolicy {
    /// Start at the documented default window for level n
    /// (lower bound + q p^{n+1} + 2) and double a few times if censored.
    Auto,
    /// Use exactly this window; a censored answer is returned as `AtLeast`.
    Fixed(usize),
    /// Use exactly this window; a censored answer is an error.
    FixedExact(usize),
}

/// The universal lower bound `q (p^{n+1} - 1)/(p - 1)`.
pub fn lower_bound(q: u64, p: u64, n: u32) -> u64 {
    let mut geom = 0u64;
    let mut pw = 1u64;
    for _ in 0..=n {
        geom += pw;
        pw *= p;
    }
    q * geom
}

/// Default window for a single level-n query.
pub fn default_trunc(q: u64, p: u64, n: u32) -> usize {
    let mut pw = 1u64;
    for _ in 0..=n {
        pw *= p;
    }
    (lower_bound(q, p, n) + q * pw + 2) as usize
}

/// All milestones `i_0 .. i_nmax` read in a single iteration pass at a fixed
/// window: iterate the germ and inspect `ord((g^{q p^n}(z) - z)/z)` at each
/// milestone step.
pub fn milestones_fixed(
    g: &Germ,
    nmax: u32,
    trunc: usize,
) -> Result<Vec<CensoredNat>, RamError> {
    if g.is_exact_linear() {
        return Ok((0..=nmax).map(|_| CensoredNat::Infinite).collect());
    }
    let trunc = trunc.max(3);
    let s = g.series_at(trunc)?;
    let id = Series::identity_like(g.gamma(), trunc);
    let mut out = Vec::with_capacity(nmax as usize + 1);
    let mut acc = id.clone();
    let mut step = 0u64;
    for n in 0..=nmax {
        let target = g.q() * pow_u64(g.p(), n);
        while step < target {
            acc = compose(&acc, &s)?;
            step += 1;
        }
        let diff = s_sub(&acc, &id)?;
        out.push(s_ord(&diff).saturating_sub(1));
    }
    Ok(out)
}

fn pow_u64(b: u64, e: u32) -> u64 {
    let mut acc = 1u64;
    for _ in 0..e {
        acc *= b;
    }
    acc
}

/// `i_n(g^q)` under the given truncation policy.
pub fn ram_index(g: &Germ, n: u32, policy: TruncPolicy) -> Result<CensoredNat, RamError> {
    if g.is_exact_linear() {
        return Ok(CensoredNat::Infinite);
    }
    match policy {
        TruncPolicy::Fixed(t) => Ok(*milestones_fixed(g, n, t)?.last().expect("nonempty")),
        TruncPolicy::FixedExact(t) => {
            let got = *milestones_fixed(g, n, t)?.last().expect("nonempty");
            if got.is_exact() {
                Ok(got)
            } else {
                Err(RamError::TruncationTooSmall)
            }
        }
        TruncPolicy::Auto => {
            let base = default_trunc(g.q(), g.p(), n);
            let mut trunc = base;
            let mut best = CensoredNat::AtLeast(0);
            for _ in 0..4 {
                // truncated input data caps the usable window
                let usable = if g.series().is_exact() {
                    trunc
                } else {
                    trunc.min(g.series().trunc())
                };
                best = *milestones_fixed(g, n, usable)?.last().expect("nonempty");
                if best.is_exact() || usable < trunc {
                    break;
                }
                trunc *= 2;
            }
            Ok(best)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    MinimallyRamified,
    AlmostMinimallyRamified,
    Neither,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::MinimallyRamified => write!(f, "MR"),
            Verdict::AlmostMinimallyRamified => write!(f, "AMR"),
            Verdict::Neither => write!(f, "Neither"),
            Verdict::Indeterminate => write!(f, "Indeterminate"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RamificationProfile {
    pub gamma: FFElem,
    pub q: u64,
    pub p: u64,
    pub entries: Vec<(u32, CensoredNat)>,
    /// q | i_0 and i_n = i_{n-1} mod q p^n on consecutive exact entries.
    pub sen_ok: TriBool,
    /// every exact entry is >= q (p^{n+1} - 1)/(p - 1).
    pub lower_bound_ok: TriBool,
    /// p | i_n forces i_{n+1} = p i_n; otherwise i_{n+1} >= p i_n + q.
    pub keating_ok: TriBool,
    pub verdict: Verdict,
}

/// Profile entries for n = 0..nmax. Default window at level n is the
/// decision threshold `lower_bound(n) + 2`: equality against the bound stays
/// decidable while anything deeper is explicitly censored. An override
/// window applies to every level.
pub fn ram_profile(
    g: &Germ,
    nmax: u32,
    trunc_override: Option<usize>,
) -> Result<RamificationProfile, RamError> {
    let (q, p) = (g.q(), g.p());
    let entries: Vec<(u32, CensoredNat)> = match trunc_override {
        Some(t) => milestones_fixed(g, nmax, t)?
            .into_iter()
            .enumerate()
            .map(|(n, v)| (n as u32, v))
            .collect(),
        None => {
            let mut out = Vec::with_capacity(nmax as usize + 1);
            for n in 0..=nmax {
                let t = lower_bound(q, p, n) as usize + 2;
                let v = *milestones_fixed(g, n, t)?.last().expect("nonempty");
                out.push((n, v));
            }
            out
        }
    };

    let vals: Vec<CensoredNat> = entries.iter().map(|&(_, v)| v).collect();
    let (mut sen_checked, mut sen_viol) = (0usize, 0usize);
    if let Some(i0) = vals[0].exact_value() {
        sen_checked += 1;
        if i0 % q != 0 {
            sen_viol += 1;
        }
    }
    for n in 1..vals.len() {
        if let (Some(prev), Some(cur)) = (vals[n - 1].exact_value(), vals[n].exact_value()) {
            sen_checked += 1;
            let modulus = q * pow_u64(p, n as u32);
            if (cur + modulus - prev % modulus) % modulus != 0 {
                sen_viol += 1;
            }
        }
    }

    let (mut lb_checked, mut lb_viol) = (0usize, 0usize);
    for (n, v) in entries.iter() {
        if let Some(val) = v.exact_value() {
            lb_checked += 1;
            if val < lower_bound(q, p, *n) {
                lb_viol += 1;
            }
        }
    }

    let (mut ke_checked, mut ke_viol) = (0usize, 0usize);
    for n in 1..vals.len() {
        if let Some(prev) = vals[n - 1].exact_value() {
            let decided = if prev % p == 0 {
                vals[n].known_eq(p * prev)
            } else {
                vals[n].known_ge(p * prev + q)
            };
            match decided {
                Some(true) => ke_checked += 1,
                Some(false) => {
                    ke_checked += 1;
                    ke_viol += 1;
                }
                None => {}
            }
        }
    }

    let mr = is_minimally_ramified(g)?;
    let verdict = if mr.verdict {
        Verdict::MinimallyRamified
    } else if p == 2 && is_almost_minimally_ramified(g)?.verdict {
        Verdict::AlmostMinimallyRamified
    } else {
        Verdict::Neither
    };

    Ok(RamificationProfile {
        gamma: g.gamma().clone(),
        q,
        p,
        entries,
        sen_ok: TriBool::from_violations(sen_checked, sen_viol),
        lower_bound_ok: TriBool::from_violations(lb_checked, lb_viol),
        keating_ok: TriBool::from_violations(ke_checked, ke_viol),
        verdict,
    })
}

#[derive(Debug, Clone)]
pub struct MrDecision {
    pub verdict: bool,
    /// (level, universal bound at that level, computed index).
    pub witness: Vec<(u32, u64, CensoredNat)>,
}

/// Minimal ramification, decided at the first levels where equality with
/// the universal bound already settles the question: n = 0, 1 for odd p and
/// n = 0, 1, 2 for p = 2. Window `bound + 2` keeps equality-vs-strict
/// decidable at every checked level.
pub fn is_minimally_ramified(g: &Germ) -> Result<MrDecision, RamError> {
    let (q, p) = (g.q(), g.p());
    let top = if p == 2 { 2 } else { 1 };
    let mut witness = Vec::new();
    let mut verdict = true;
    for n in 0..=top {
        let bound = lower_bound(q, p, n);
        let got = ram_index(g, n, TruncPolicy::Fixed(bound as usize + 2))?;
        verdict &= got.known_eq(bound) == Some(true);
        witness.push((n, bound, got));
    }
    Ok(MrDecision { verdict, witness })
}

#[derive(Debug, Clone)]
pub struct AmrDecision {
    pub verdict: bool,
    /// (level, target 2^{n+1} q, computed index).
    pub witness: Vec<(u32, u64, CensoredNat)>,
}

/// Almost minimal ramification (characteristic 2): the full condition
/// `i_n = 2^{n+1} q` for all n collapses to `i_0 = 2q`, since an even i_0
/// forces every later index to double. The witness records n <= 2.
pub fn is_almost_minimally_ramified(g: &Germ) -> Result<AmrDecision, RamError> {
    let (q, p) = (g.q(), g.p());
    if p != 2 {
        return Err(RamError::CharMismatch { p });
    }
    let mut witness = Vec::new();
    for n in 0..=2u32 {
        let target = q << (n + 1);
        let got = ram_index(g, n, TruncPolicy::Fixed(target as usize + 2))?;
        witness.push((n, target, got));
    }
    let verdict = witness[0].2.known_eq(2 * q) == Some(true);
    Ok(AmrDecision { verdict, witness })
}

/// The m-th finite difference along the orbit of `g^{q p^n}`:
/// `D_1(z) = g^{q p^n}(z) - z`, `D_m(z) = D_{m-1}(g^{q p^n}(z)) - D_{m-1}(z)`.
/// Satisfies `D_p(z) = g^{q p^{n+1}}(z) - z` by telescoping, which the test
/// suite uses as an independent oracle for the iteration code.
pub fn keating_delta(g: &Germ, n: u32, m: u32) -> Result<Series<FFElem>, RamError> {
    assert!(m >= 1, "finite differences start at m = 1");
    let trunc = g.series().trunc();
    let s = g.series_at(trunc)?;
    let steps = g.q() * pow_u64(g.p(), n);
    let id = Series::identity_like(g.gamma(), trunc);
    let mut big = id.clone();
    for _ in 0..steps {
        big = compose(&big, &s)?;
    }
    let mut delta = s_sub(&big, &id)?;
    for _ in 1..m {
        delta = s_sub(&compose(&delta, &big)?, &delta)?;
    }
    Ok(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::ff_make;
    use crate::series::Series;
    use alloc::vec;

    fn germ(p: u64, vals: &[i64]) -> Germ {
        let f = ff_make(p, 1, None).unwrap();
        Germ::new(Series::from_coeffs(
            vals.iter().map(|&v| f.from_int(v)).collect(),
            true,
        ))
        .unwrap()
    }

    #[test]
    fn bound_and_default_trunc() {
        assert_eq!(lower_bound(1, 3, 0), 1);
        assert_eq!(lower_bound(1, 3, 1), 4);
        assert_eq!(lower_bound(1, 3, 2), 13);
        assert_eq!(lower_bound(2, 11, 1), 24);
        assert_eq!(lower_bound(3, 7, 1), 24);
        assert_eq!(default_trunc(1, 3, 1), 4 + 9 + 2);
    }

    #[test]
    fn f3_profile_is_minimal() {
        let g = germ(3, &[0, 1, 1]);
        let prof = ram_profile(&g, 2, None).unwrap();
        let vals: Vec<_> = prof.entries.iter().map(|&(_, v)| v).collect();
        assert_eq!(
            vals,
            vec![
                CensoredNat::Exact(1),
                CensoredNat::Exact(4),
                CensoredNat::Exact(13)
            ]
        );
        assert_eq!(prof.verdict, Verdict::MinimallyRamified);
        assert_eq!(prof.sen_ok, TriBool::True);
        assert_eq!(prof.lower_bound_ok, TriBool::True);
        assert_eq!(prof.keating_ok, TriBool::True);
    }

    #[test]
    fn f11_example_censored_then_exact() {
        let g = germ(11, &[0, -1, 1]);
        assert_eq!(
            ram_index(&g, 0, TruncPolicy::Fixed(26)).unwrap(),
            CensoredNat::Exact(2)
        );
        assert_eq!(
            ram_index(&g, 1, TruncPolicy::Fixed(30)).unwrap(),
            CensoredNat::AtLeast(29)
        );
        assert_eq!(
            ram_index(&g, 1, TruncPolicy::Fixed(60)).unwrap(),
            CensoredNat::Exact(46)
        );
        assert!(matches!(
            ram_index(&g, 1, TruncPolicy::FixedExact(30)),
            Err(RamError::TruncationTooSmall)
        ));
    }

    #[test]
    fn f7_quadratics() {
        // multiplier 2: not minimal; multiplier 4: minimal
        let g2 = germ(7, &[0, 2, 1]);
        let g4 = germ(7, &[0, 4, 1]);
        assert!(!is_minimally_ramified(&g2).unwrap().verdict);
        let mr4 = is_minimally_ramified(&g4).unwrap();
        assert!(mr4.verdict);
        assert_eq!(mr4.witness[0].2, CensoredNat::Exact(3));
        assert_eq!(mr4.witness[1].2, CensoredNat::Exact(24));
    }

    #[test]
    fn f2_amr_and_not() {
        let amr = germ(2, &[0, 1, 0, 1]); // z + z^3
        let d = is_almost_minimally_ramified(&amr).unwrap();
        assert!(d.verdict);
        assert_eq!(
            d.witness.iter().map(|w| w.2).collect::<Vec<_>>(),
            vec![
                CensoredNat::Exact(2),
                CensoredNat::Exact(4),
                CensoredNat::Exact(8)
            ]
        );
        let not = germ(2, &[0, 1, 1]); // z + z^2: i_2 = 15, fails both notions
        assert!(!is_almost_minimally_ramified(&not).unwrap().verdict);
        let mr = is_minimally_ramified(&not).unwrap();
        assert!(!mr.verdict);
        // failure shows up at n = 2 only
        assert_eq!(mr.witness[0].2, CensoredNat::Exact(1));
        assert_eq!(mr.witness[1].2, CensoredNat::Exact(3));
        assert_eq!(mr.witness[2].2.known_eq(7), Some(false));
    }

    #[test]
    fn linear_germ_is_identity_at_milestones() {
        let g = germ(7, &[0, 4]);
        assert_eq!(
            ram_index(&g, 1, TruncPolicy::Auto).unwrap(),
            CensoredNat::Infinite
        );
        let prof = ram_profile(&g, 2, None).unwrap();
        assert!(prof.entries.iter().all(|&(_, v)| v == CensoredNat::Infinite));
        assert_eq!(prof.verdict, Verdict::Neither);
    }

    #[test]
    fn keating_delta_telescopes() {
        let g = germ(3, &[0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        let dp = keating_delta(&g, 1, 3).unwrap();
        let s = g.series_at(16).unwrap();
        let id = Series::identity_like(g.gamma(), 16);
        let mut it = id.clone();
        for _ in 0..9 {
            it = compose(&it, &s).unwrap();
        }
        let want = s_sub(&it, &id).unwrap();
        assert_eq!(dp.coeffs(), want.coeffs());
        // frozen: ord of the second difference at n = 0 is 3
        let d2 = keating_delta(&g, 0, 2).unwrap();
        assert_eq!(s_ord(&d2), CensoredNat::Exact(3));
    }
}
