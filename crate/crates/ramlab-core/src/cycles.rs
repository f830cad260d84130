//! Certified optimal cycles of polynomial maps over ultrametric
//! coefficient domains.
//!
//! For a map `P(z) = lambda z (1 + ...)` with a unit multiplier, the fixed
//! points of `P^{q p^n}` inside the open unit disk are read off the Newton
//! polygon of `P^{q p^n}(z) - z`. Their count is tied to the lower
//! ramification index of the reduced germ (total positive mass equals
//! `i_n + 1`, a relation this module re-checks at every level), and the
//! level verdict compares where the new mass sits against the best
//! possible valuation `val(lambda^{q p^n} - 1) - val(lambda^{q p^{n-1}} - 1)`
//! normalized by the period, then certifies root simplicity so that a
//! polygon that merely concentrates old cycles is not mistaken for new
//! ones.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::censored::{CensoredNat, Rat};
use crate::coeff::{poly_mul, Ring};
use crate::ff::{ff_make, searched_modulus, FFElem, FieldError, FieldSpec};
use crate::polygon::{newton_polygon, NewtonPolygon};
use crate::ram::{ram_index, RamError, TruncPolicy};
use crate::series::{Germ, Series, SeriesError};
use crate::valued::{bound_valuation, CensoredVal, FPoly, RatFun, ValuedError, ValuedScalar};

pub const DEFAULT_DEGREE_CEILING: u64 = 10_000;
pub const DEFAULT_EXACT_GCD_MAX_DEG: usize = 120;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CyclesError {
    Shape(&'static str),
    /// The multiplier (coefficient of z) must have valuation exactly 0.
    NonUnitMultiplier,
    /// Iterate degree would exceed the ceiling.
    DegreeCeiling { degree: u64, ceiling: u64 },
    Valued(ValuedError),
    Series(SeriesError),
    Field(FieldError),
    Ram(RamError),
    /// A cross-check between two independent computations failed;
    /// indicates a bug, not bad input.
    Internal(&'static str),
}

impl fmt::Display for CyclesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CyclesError::Shape(m) => write!(f, "bad map shape: {}", m),
            CyclesError::NonUnitMultiplier => {
                write!(f, "the coefficient of z must have valuation 0")
            }
            CyclesError::DegreeCeiling { degree, ceiling } => write!(
                f,
                "iterate degree {} exceeds the ceiling {}; lower nmax or raise the ceiling",
                degree, ceiling
            ),
            CyclesError::Valued(e) => write!(f, "{}", e),
            CyclesError::Series(e) => write!(f, "{}", e),
            CyclesError::Field(e) => write!(f, "{}", e),
            CyclesError::Ram(e) => write!(f, "{}", e),
            CyclesError::Internal(m) => write!(f, "internal invariant violated: {}", m),
        }
    }
}

impl From<ValuedError> for CyclesError {
    fn from(e: ValuedError) -> Self {
        CyclesError::Valued(e)
    }
}

impl From<SeriesError> for CyclesError {
    fn from(e: SeriesError) -> Self {
        CyclesError::Series(e)
    }
}

impl From<FieldError> for CyclesError {
    fn from(e: FieldError) -> Self {
        CyclesError::Field(e)
    }
}

impl From<RamError> for CyclesError {
    fn from(e: RamError) -> Self {
        CyclesError::Ram(e)
    }
}

/// Polynomial in z over a valued coefficient domain. Trailing provably
/// zero coefficients are trimmed; at least one coefficient is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct OKPoly {
    c: Vec<ValuedScalar>,
}

impl OKPoly {
    pub fn new(mut c: Vec<ValuedScalar>) -> OKPoly {
        assert!(!c.is_empty(), "a polynomial stores at least one coefficient");
        while c.len() > 1 && c.last().map_or(false, |v| v.is_zero()) {
            c.pop();
        }
        OKPoly { c }
    }

    pub fn constant(s: ValuedScalar) -> OKPoly {
        OKPoly { c: vec![s] }
    }

    pub fn coeffs(&self) -> &[ValuedScalar] {
        &self.c
    }

    pub fn deg(&self) -> u64 {
        (self.c.len() - 1) as u64
    }

    fn zero_scalar(&self) -> ValuedScalar {
        self.c[0].zero_like()
    }

    pub fn coeff(&self, i: usize) -> ValuedScalar {
        self.c.get(i).cloned().unwrap_or_else(|| self.zero_scalar())
    }

    pub fn add(&self, rhs: &OKPoly) -> OKPoly {
        let n = self.c.len().max(rhs.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).add(&rhs.coeff(i)));
        }
        OKPoly::new(out)
    }

    pub fn sub(&self, rhs: &OKPoly) -> OKPoly {
        let n = self.c.len().max(rhs.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).sub(&rhs.coeff(i)));
        }
        OKPoly::new(out)
    }

    pub fn mul(&self, rhs: &OKPoly) -> OKPoly {
        if let (Some((fa, ra)), Some((fb, rb))) = (flat_rows(self), flat_rows(rhs)) {
            if fa.as_ref() == fb.as_ref() {
                return mul_flat(&fa, &ra, &rb);
            }
        }
        OKPoly::new(poly_mul(&self.c, &rhs.c, &self.zero_scalar()))
    }

    pub fn scale(&self, s: &ValuedScalar) -> OKPoly {
        OKPoly::new(self.c.iter().map(|v| v.mul(s)).collect())
    }

    /// Multiply by z^k.
    pub fn shift_up(&self, k: usize) -> OKPoly {
        let mut c = vec![self.zero_scalar(); k];
        c.extend(self.c.iter().cloned());
        OKPoly::new(c)
    }

    /// Divide by z^k; the low coefficients must be provably zero.
    pub fn shift_down(&self, k: usize) -> Result<OKPoly, CyclesError> {
        if k >= self.c.len() || self.c[..k].iter().any(|v| !v.is_zero()) {
            return Err(CyclesError::Shape("cannot divide by z^k"));
        }
        Ok(OKPoly::new(self.c[k..].to_vec()))
    }

    /// Subtract the identity map z.
    pub fn sub_z(&self) -> OKPoly {
        let one = self.c[0].one_like();
        let mut c = self.c.clone();
        while c.len() < 2 {
            c.push(self.zero_scalar());
        }
        c[1] = c[1].sub(&one);
        OKPoly::new(c)
    }

    /// Formal derivative in z over residue characteristic p.
    pub fn derivative_z(&self) -> OKPoly {
        if self.c.len() == 1 {
            return OKPoly::constant(self.zero_scalar());
        }
        let out = self.c[1..]
            .iter()
            .enumerate()
            .map(|(i, v)| v.mul(&int_scalar(v, (i + 1) as u64)))
            .collect();
        OKPoly::new(out)
    }

    pub fn vals(&self) -> Vec<CensoredVal> {
        self.c.iter().map(|v| v.val()).collect()
    }

    /// Reduce every coefficient to the residue field; exact because the
    /// residue of each coefficient is exact whenever it is defined at all.
    pub fn reduce(&self) -> Result<(Arc<FieldSpec>, Series<FFElem>), CyclesError> {
        let field = self.c[0].residue_field()?;
        let coeffs = self
            .c
            .iter()
            .map(|v| v.residue(&field))
            .collect::<Result<Vec<_>, _>>()?;
        let mut coeffs = coeffs;
        if coeffs.len() < 2 {
            coeffs.resize(2, field.zero());
        }
        Ok((field, Series::from_coeffs(coeffs, true)))
    }
}

/// Substitute `inner` into `outer` (Horner over the outer coefficients).
pub fn compose_okpoly(outer: &OKPoly, inner: &OKPoly) -> OKPoly {
    let n = outer.c.len();
    let mut acc = OKPoly::constant(outer.c[n - 1].clone());
    for i in (0..n - 1).rev() {
        acc = acc.mul(inner);
        acc = acc.add(&OKPoly::constant(outer.c[i].clone()));
    }
    acc
}

/// `P^m` under composition, guarded by a degree ceiling.
pub fn iterate_okpoly(p: &OKPoly, m: u64, ceiling: u64) -> Result<OKPoly, CyclesError> {
    let mut chain = IterateChain::start(p.clone(), ceiling)?;
    chain.advance_to(m)?;
    Ok(chain.acc.clone())
}

/// Composition chain `P, P^2, P^3, ...` advanced on demand so that one
/// report can reuse every intermediate level.
struct IterateChain {
    map: OKPoly,
    acc: OKPoly,
    steps: u64,
    ceiling: u64,
}

impl IterateChain {
    fn start(map: OKPoly, ceiling: u64) -> Result<IterateChain, CyclesError> {
        if map.deg() < 1 {
            return Err(CyclesError::Shape("constant map"));
        }
        Ok(IterateChain {
            acc: map.clone(),
            map,
            steps: 1,
            ceiling,
        })
    }

    fn advance_to(&mut self, m: u64) -> Result<&OKPoly, CyclesError> {
        assert!(m >= self.steps, "chain cannot rewind");
        // the final degree is known before any work: leading coefficients
        // cannot cancel, so each composition multiplies the degree
        let mut projected = self.acc.deg();
        for _ in self.steps..m {
            projected = projected.saturating_mul(self.map.deg());
            if projected > self.ceiling {
                return Err(CyclesError::DegreeCeiling {
                    degree: projected,
                    ceiling: self.ceiling,
                });
            }
        }
        while self.steps < m {
            self.acc = compose_okpoly(&self.map, &self.acc);
            self.steps += 1;
        }
        Ok(&self.acc)
    }
}

fn int_scalar(sample: &ValuedScalar, n: u64) -> ValuedScalar {
    let mut acc = sample.zero_like();
    let one = sample.one_like();
    let p = sample.residue_char();
    for _ in 0..(n % p) {
        acc = acc.add(&one);
    }
    acc
}

// flat fast path: all coefficients are exact polynomials in t over a prime
// field, so one u64 2-D convolution with a single reduction at the end
// replaces per-element field arithmetic

fn flat_rows(a: &OKPoly) -> Option<(Arc<FieldSpec>, Vec<Vec<u64>>)> {
    let mut field: Option<Arc<FieldSpec>> = None;
    let mut rows = Vec::with_capacity(a.c.len());
    for c in &a.c {
        let ValuedScalar::Rational(rf) = c else {
            return None;
        };
        if !rf.den_is_one() || rf.field().k() != 1 {
            return None;
        }
        match &field {
            None => field = Some(rf.field().clone()),
            Some(f) => {
                if f.as_ref() != rf.field().as_ref() {
                    return None;
                }
            }
        }
        rows.push(
            rf.num()
                .coeffs()
                .iter()
                .map(|e| e.as_int().expect("prime field"))
                .collect::<Vec<u64>>(),
        );
    }
    field.map(|f| (f, rows))
}

fn mul_flat(field: &Arc<FieldSpec>, ra: &[Vec<u64>], rb: &[Vec<u64>]) -> OKPoly {
    let p = field.p();
    let dz = ra.len() + rb.len() - 1;
    let ta = ra.iter().map(|r| r.len()).max().unwrap_or(0);
    let tb = rb.iter().map(|r| r.len()).max().unwrap_or(0);
    if ta == 0 || tb == 0 {
        return OKPoly::constant(ValuedScalar::Rational(RatFun::zero(field)));
    }
    let stride = ta + tb - 1;
    let mut buf = vec![0u64; dz * stride];
    for (ia, rowa) in ra.iter().enumerate() {
        if rowa.is_empty() {
            continue;
        }
        for (ib, rowb) in rb.iter().enumerate() {
            if rowb.is_empty() {
                continue;
            }
            let base = (ia + ib) * stride;
            for (ja, &va) in rowa.iter().enumerate() {
                if va == 0 {
                    continue;
                }
                let out = &mut buf[base + ja..base + ja + rowb.len()];
                for (o, &vb) in out.iter_mut().zip(rowb.iter()) {
                    *o += va * vb;
                }
            }
        }
    }
    let mut out = Vec::with_capacity(dz);
    for z in 0..dz {
        let row = &buf[z * stride..(z + 1) * stride];
        let coeffs: Vec<FFElem> = row
            .iter()
            .map(|&v| field.from_int((v % p) as i64))
            .collect();
        out.push(ValuedScalar::Rational(RatFun::from_poly(FPoly::from_coeffs(
            field, coeffs,
        ))));
    }
    OKPoly::new(out)
}

// ---- root simplicity ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Simplicity {
    /// Certified squarefree; the tag names the certifying test.
    Simple(&'static str),
    /// Certified to have a multiple root.
    Multiple(&'static str),
    /// Every certificate attempt was inconclusive.
    Unknown,
    /// Not checked (truncated backend).
    Unchecked,
}

impl fmt::Display for Simplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Simplicity::Simple(t) => write!(f, "simple ({})", t),
            Simplicity::Multiple(t) => write!(f, "multiple ({})", t),
            Simplicity::Unknown => write!(f, "unknown"),
            Simplicity::Unchecked => write!(f, "unchecked"),
        }
    }
}

fn as_ratfun_vec(g: &OKPoly) -> Option<Vec<RatFun>> {
    g.c.iter()
        .map(|c| match c {
            ValuedScalar::Rational(rf) => Some(rf.clone()),
            _ => None,
        })
        .collect()
}

fn zdeg(v: &[RatFun]) -> Option<usize> {
    v.iter().rposition(|x| !x.is_zero())
}

/// Scale rational-function coefficients by their common denominator,
/// leaving polynomials in t.
fn clear_denominators(v: &[RatFun]) -> Vec<FPoly> {
    let field = v[0].field().clone();
    let mut l = FPoly::one(&field);
    for c in v {
        if !c.den_is_one() {
            let g = FPoly::gcd(&l, c.den()).expect("nonzero inputs");
            let (q, _) = l.divrem(&g).expect("gcd is nonzero");
            l = q.mul(c.den());
        }
    }
    v.iter()
        .map(|c| {
            let (q, r) = l.divrem(c.den()).expect("denominator is nonzero");
            debug_assert!(r.is_zero());
            c.num().mul(&q)
        })
        .collect()
}

fn zdeg_f(v: &[FPoly]) -> Option<usize> {
    v.iter().rposition(|x| !x.is_zero())
}

/// Divide out the common t-content and drop leading z zeros.
fn make_primitive(v: &mut Vec<FPoly>) {
    if let Some(d) = zdeg_f(v) {
        v.truncate(d + 1);
    } else {
        v.clear();
        return;
    }
    let mut content: Option<FPoly> = None;
    for c in v.iter() {
        if c.is_zero() {
            continue;
        }
        content = Some(match content {
            None => c.monic(),
            Some(g) => FPoly::gcd(&g, c).expect("nonzero"),
        });
        if content.as_ref().map_or(false, |g| g.deg() == Some(0)) {
            return;
        }
    }
    let content = content.expect("nonzero polynomial");
    for c in v.iter_mut() {
        let (q, r) = c.divrem(&content).expect("content is nonzero");
        debug_assert!(r.is_zero());
        *c = q;
    }
}

/// lead(b)^(deg a - deg b + 1) * a mod b, coefficients in t staying
/// polynomial throughout.
fn pseudo_rem(a: &[FPoly], b: &[FPoly]) -> Vec<FPoly> {
    let db = zdeg_f(b).expect("nonzero divisor");
    let lb = b[db].clone();
    let mut r: Vec<FPoly> = a.to_vec();
    while let Some(dr) = zdeg_f(&r) {
        if dr < db {
            break;
        }
        let coef = r[dr].clone();
        for c in r.iter_mut() {
            *c = c.mul(&lb);
        }
        let shift = dr - db;
        for i in 0..=db {
            r[shift + i] = r[shift + i].sub(&coef.mul(&b[i]));
        }
        debug_assert!(r[dr].is_zero());
        r.truncate(dr);
    }
    r
}

/// Degree in z of gcd(a, b), via a primitive pseudo-remainder sequence
/// so coefficient degrees stay bounded.
fn zgcd_degree(a: &[RatFun], b: &[RatFun]) -> usize {
    let mut x = clear_denominators(a);
    let mut y = clear_denominators(b);
    make_primitive(&mut x);
    make_primitive(&mut y);
    if zdeg_f(&x) < zdeg_f(&y) {
        core::mem::swap(&mut x, &mut y);
    }
    while zdeg_f(&y).is_some() {
        let mut r = pseudo_rem(&x, &y);
        make_primitive(&mut r);
        x = y;
        y = r;
    }
    zdeg_f(&x).unwrap_or(0)
}

/// Smallest extension of the base field with at least 64 elements, with an
/// embedding of the base field.
fn specialization_field(
    base: &Arc<FieldSpec>,
) -> Result<(Arc<FieldSpec>, FFElem), CyclesError> {
    let p = base.p();
    let k = base.k();
    let mut e = k;
    loop {
        let mut card = 1u64;
        let mut over = false;
        for _ in 0..e {
            card = match card.checked_mul(p) {
                Some(c) => c,
                None => {
                    over = true;
                    break;
                }
            };
        }
        if over || card >= 64 {
            break;
        }
        e += k;
    }
    if e == k {
        let root = base.gen_x();
        return Ok((base.clone(), root));
    }
    let modulus = searched_modulus(p, e).ok_or(CyclesError::Internal("no modulus found"))?;
    let signed: Vec<i64> = modulus.iter().map(|&v| v as i64).collect();
    let big = ff_make(p, e, Some(&signed))?;
    if k == 1 {
        return Ok((big.clone(), big.one()));
    }
    // a root of the base modulus generates the embedded copy
    let base_mod = base.modulus();
    let root = big
        .elements()
        .find(|x| {
            let mut acc = big.zero();
            for &m in base_mod.iter().rev() {
                acc = acc.mul(x).add(&big.from_int(m as i64));
            }
            acc.is_zero()
        })
        .ok_or(CyclesError::Internal("base modulus has no root upstairs"))?;
    Ok((big, root))
}

fn embed(x: &FFElem, big: &Arc<FieldSpec>, root: &FFElem) -> FFElem {
    if x.spec().as_ref() == big.as_ref() {
        return x.clone();
    }
    let mut acc = big.zero();
    for &c in x.coords().iter().rev() {
        acc = acc.mul(root).add(&big.from_int(c as i64));
    }
    acc
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Squarefreeness of an exact polynomial in z over F_q(t), in three tiers:
/// a vanishing z-derivative certifies a multiple root outright; small
/// degrees get a definitive gcd over the fraction field; large degrees get
/// a one-sided certificate by specializing t in an extension field, sound
/// because specializing can only enlarge the gcd degree when the leading
/// coefficient survives.
pub fn squarefree_status(g: &OKPoly, seed: u64, exact_gcd_max_deg: usize) -> Simplicity {
    let Some(coeffs) = as_ratfun_vec(g) else {
        return Simplicity::Unchecked;
    };
    let dz = match zdeg(&coeffs) {
        None | Some(0) => return Simplicity::Simple("degree-zero"),
        Some(d) => d,
    };
    let deriv = as_ratfun_vec(&g.derivative_z()).expect("same backend");
    if zdeg(&deriv).is_none() {
        return Simplicity::Multiple("derivative-zero");
    }
    if dz <= exact_gcd_max_deg {
        return if zgcd_degree(&coeffs, &deriv) == 0 {
            Simplicity::Simple("exact-gcd")
        } else {
            Simplicity::Multiple("exact-gcd")
        };
    }
    // tier 3: specialization certificate
    let base = coeffs[0].field().clone();
    let Ok((big, root)) = specialization_field(&base) else {
        return Simplicity::Unknown;
    };
    let card = big.card();
    let mut state = seed ^ 0xa076_1d64_78bd_642f;
    'attempt: for _ in 0..8 {
        // indices 1..card are the nonzero elements in base-p digits
        let idx = 1 + splitmix(&mut state) % (card - 1);
        let mut digits = Vec::with_capacity(big.k());
        let mut v = idx;
        for _ in 0..big.k() {
            digits.push((v % big.p()) as i64);
            v /= big.p();
        }
        let tau = big.from_coeffs(&digits);
        let mut spec_g: Vec<FFElem> = Vec::with_capacity(coeffs.len());
        for rf in &coeffs {
            let map = |c: &FFElem| embed(c, &big, &root);
            let den = rf.den().eval_map(&map, &tau);
            if den.is_zero() {
                continue 'attempt;
            }
            let num = rf.num().eval_map(&map, &tau);
            spec_g.push(num.div(&den).expect("nonzero denominator"));
        }
        if spec_g[dz].is_zero() {
            continue 'attempt; // leading coefficient collapsed at tau
        }
        let gp = FPoly::from_coeffs(&big, spec_g);
        let mut dp: Vec<FFElem> = Vec::new();
        for (i, c) in gp.coeffs().iter().enumerate().skip(1) {
            dp.push(c.mul(&big.from_int(i as i64)));
        }
        let gd = FPoly::from_coeffs(&big, dp);
        if gd.is_zero() {
            continue 'attempt; // specialization killed the derivative
        }
        match FPoly::gcd(&gp, &gd) {
            Ok(g) if g.deg() == Some(0) => return Simplicity::Simple("specialized-gcd"),
            _ => continue 'attempt,
        }
    }
    Simplicity::Unknown
}

// ---- cycle reports ----

#[derive(Debug, Clone, Copy)]
pub struct CycleOptions {
    pub nmax: u32,
    pub degree_ceiling: u64,
    pub exact_gcd_max_deg: usize,
    pub seed: u64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions {
            nmax: 2,
            degree_ceiling: DEFAULT_DEGREE_CEILING,
            exact_gcd_max_deg: DEFAULT_EXACT_GCD_MAX_DEG,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelVerdict {
    /// A full set of new cycle points of exact period q p^n at the best
    /// possible distance, all simple.
    Optimal,
    NotOptimal,
    /// The polygon gained mass only at valuations already occupied, and a
    /// multiple root is certified: old cycles collided, nothing new.
    Concentration,
    Indeterminate,
}

impl fmt::Display for LevelVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelVerdict::Optimal => write!(f, "optimal"),
            LevelVerdict::NotOptimal => write!(f, "not-optimal"),
            LevelVerdict::Concentration => write!(f, "concentration"),
            LevelVerdict::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LevelRecord {
    pub n: u32,
    pub period: u64,
    /// i_n of the reduced germ.
    pub index: CensoredNat,
    /// i_n - i_{n-1} (i_0 itself at n = 0); None when censoring hides it.
    pub increment: Option<CensoredNat>,
    pub target_increment: u64,
    pub bound_val: Option<Rat>,
    pub polygon: Option<NewtonPolygon>,
    /// Valuation multiset of the mass added at this level.
    pub new_mass: Vec<(Rat, u64)>,
    pub simplicity: Simplicity,
    pub verdict: LevelVerdict,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CycleReport {
    pub p: u64,
    pub q: u64,
    pub degenerate_linear: bool,
    pub reduction: Vec<FFElem>,
    pub reduction_profile: Vec<(u32, CensoredNat)>,
    pub levels: Vec<LevelRecord>,
    pub warnings: Vec<String>,
}

fn mass_diff(
    cur: &[(Rat, u64)],
    prev: &[(Rat, u64)],
) -> Result<Vec<(Rat, u64)>, CyclesError> {
    let mut out = Vec::new();
    for &(v, c) in cur {
        let before = prev
            .iter()
            .find(|&&(pv, _)| pv == v)
            .map(|&(_, pc)| pc)
            .unwrap_or(0);
        if c < before {
            return Err(CyclesError::Internal("positive mass decreased"));
        }
        if c > before {
            out.push((v, c - before));
        }
    }
    for &(pv, _) in prev {
        if !cur.iter().any(|&(v, _)| v == pv) {
            return Err(CyclesError::Internal("a previous valuation disappeared"));
        }
    }
    Ok(out)
}

/// Full per-level optimality analysis of a polynomial map.
pub fn cycle_report(map: &OKPoly, opts: &CycleOptions) -> Result<CycleReport, CyclesError> {
    if map.c.len() < 2 {
        return Err(CyclesError::Shape("the map needs a z term"));
    }
    // a literal zero is censored on the p-adic backend, so accept a zero
    // representative there
    let structurally_zero = |v: &ValuedScalar| match v {
        c if c.is_zero() => true,
        ValuedScalar::Padic(x) => x.value() == 0,
        _ => false,
    };
    if !structurally_zero(&map.c[0]) {
        return Err(CyclesError::Shape("constant term must be exactly zero"));
    }
    let lambda = map.c[1].clone();
    if lambda.val() != CensoredVal::Exact(0) {
        return Err(CyclesError::NonUnitMultiplier);
    }
    let exact_backend = matches!(lambda, ValuedScalar::Rational(_));

    let (field, reduced) = map.reduce()?;
    let germ = Germ::new(reduced).map_err(CyclesError::Series)?;
    let p = field.p();
    let q = germ.q();
    let reduction = germ.series().coeffs().to_vec();

    let mut warnings: Vec<String> = Vec::new();
    if germ.is_exact_linear() {
        warnings.push(String::from(
            "the reduction is linear: every point of the open disk stays at its distance and no finite level carries cycle data",
        ));
        return Ok(CycleReport {
            p,
            q,
            degenerate_linear: true,
            reduction,
            reduction_profile: Vec::new(),
            levels: Vec::new(),
            warnings,
        });
    }

    // canonical family: lambda z (1 + c z^q) with a unit c
    let canonical = map.c.len() == (q + 2) as usize
        && map
            .c
            .iter()
            .enumerate()
            .all(|(i, v)| i == 1 || i == (q + 1) as usize || structurally_zero(v))
        && map.c[(q + 1) as usize].val() == CensoredVal::Exact(0);
    if !canonical {
        warnings.push(String::from(
            "map is outside the family lambda z (1 + c z^q) with unit c; the verdict applies to these coefficients, no genericity is implied",
        ));
    }
    if (q + 1) % p == 0 {
        warnings.push(format!(
            "p = {} divides q + 1 = {}; the usual genericity of the canonical family fails here",
            p,
            q + 1
        ));
    }
    if matches!(lambda, ValuedScalar::Padic(_)) {
        warnings.push(String::from(
            "p-adic backend: coefficients live in characteristic 0, simplicity is not checked and valuations censor at the working precision",
        ));
    }
    if matches!(lambda, ValuedScalar::Laurent(_)) {
        warnings.push(String::from(
            "truncated backend: root simplicity is not checked; use the exact backend to separate concentration from new cycles",
        ));
    }

    let mut profile = Vec::with_capacity(opts.nmax as usize + 1);
    for n in 0..=opts.nmax {
        profile.push((n, ram_index(&germ, n, TruncPolicy::Auto)?));
    }

    let mut chain = IterateChain::start(map.clone(), opts.degree_ceiling)?;
    let mut levels: Vec<LevelRecord> = Vec::new();
    let mut prev_mass: Option<Vec<(Rat, u64)>> = None;
    let mut prev_index: Option<CensoredNat> = None;
    let mut prev_z_order: Option<u64> = None;

    for n in 0..=opts.nmax {
        let period = q * checked_pow_u64(p, n)?;
        let iter = chain.advance_to(period)?;
        let f = iter.sub_z();
        let index = profile[n as usize].1;
        let target_increment = period;
        let increment = match (n, prev_index) {
            (0, _) => Some(index),
            (_, Some(prev)) => censored_diff(index, prev),
            (_, None) => None,
        };
        let mut notes: Vec<String> = Vec::new();

        // F(0) = P^m(0) - 0 = 0 exactly by the shape contract, even when
        // the backend censors it
        let mut fvals = f.vals();
        fvals[0] = CensoredVal::InfiniteZero;
        let polygon = match newton_polygon(&fvals) {
            Ok(pgn) => Some(pgn),
            Err(e) => {
                notes.push(format!("polygon indeterminate: {}", e));
                None
            }
        };
        let bound_val = match bound_valuation(&lambda, q, n) {
            Ok(b) => Some(b),
            Err(e) => {
                notes.push(format!("optimal valuation unavailable: {}", e));
                None
            }
        };

        // mass law: total positive mass equals i_n + 1 whenever both sides
        // are exact (independent recomputation of the same number)
        if let (Some(pgn), Some(iv)) = (&polygon, index.exact_value()) {
            if pgn.positive_mass() != iv + 1 {
                return Err(CyclesError::Internal(
                    "polygon mass does not match the reduction profile",
                ));
            }
        }

        let (new_mass, conc_shape) = match &polygon {
            None => (Vec::new(), false),
            Some(pgn) => {
                let cur = pgn.positive_vals();
                if let Some(zp) = prev_z_order {
                    if pgn.z_order() != zp {
                        notes.push(format!(
                            "multiplicity of z = 0 changed from {} to {}",
                            zp,
                            pgn.z_order()
                        ));
                    }
                }
                prev_z_order = Some(pgn.z_order());
                match &prev_mass {
                    None => {
                        let nm = cur.clone();
                        prev_mass = Some(cur);
                        (nm, false)
                    }
                    Some(prev) => {
                        let nm = mass_diff(&cur, prev)?;
                        let conc = n >= 1
                            && !nm.is_empty()
                            && nm.iter().all(|(v, _)| prev.iter().any(|(pv, _)| pv == v));
                        prev_mass = Some(cur);
                        (nm, conc)
                    }
                }
            }
        };

        let simplicity = if !exact_backend {
            Simplicity::Unchecked
        } else {
            match &polygon {
                None => Simplicity::Unchecked,
                Some(pgn) => {
                    let stripped = f.shift_down(pgn.z_order() as usize)?;
                    squarefree_status(&stripped, opts.seed ^ (n as u64), opts.exact_gcd_max_deg)
                }
            }
        };

        let verdict = level_verdict(
            &polygon,
            bound_val,
            increment,
            target_increment,
            &new_mass,
            conc_shape,
            simplicity,
            &mut notes,
        )?;

        levels.push(LevelRecord {
            n,
            period,
            index,
            increment,
            target_increment,
            bound_val,
            polygon,
            new_mass,
            simplicity,
            verdict,
            notes,
        });
        prev_index = Some(index);
    }

    Ok(CycleReport {
        p,
        q,
        degenerate_linear: false,
        reduction,
        reduction_profile: profile,
        levels,
        warnings,
    })
}

fn censored_diff(cur: CensoredNat, prev: CensoredNat) -> Option<CensoredNat> {
    match (cur, prev) {
        (CensoredNat::Exact(a), CensoredNat::Exact(b)) => Some(CensoredNat::Exact(a - b)),
        (CensoredNat::AtLeast(a), CensoredNat::Exact(b)) => {
            Some(CensoredNat::AtLeast(a.saturating_sub(b)))
        }
        _ => None,
    }
}

#[allow(clippy::too_many_arguments)]
fn level_verdict(
    polygon: &Option<NewtonPolygon>,
    bound_val: Option<Rat>,
    increment: Option<CensoredNat>,
    target_increment: u64,
    new_mass: &[(Rat, u64)],
    conc_shape: bool,
    simplicity: Simplicity,
    notes: &mut Vec<String>,
) -> Result<LevelVerdict, CyclesError> {
    if let Simplicity::Multiple(tag) = simplicity {
        return if conc_shape {
            notes.push(format!(
                "new mass sits only at already-occupied valuations and a multiple root is certified ({}): existing cycles collided",
                tag
            ));
            Ok(LevelVerdict::Concentration)
        } else {
            notes.push(format!("multiple periodic points certified ({})", tag));
            Ok(LevelVerdict::NotOptimal)
        };
    }
    let Some(pgn) = polygon else {
        return Ok(LevelVerdict::Indeterminate);
    };
    let Some(bound) = bound_val else {
        return Ok(LevelVerdict::Indeterminate);
    };
    match increment.map(|i| i.known_eq(target_increment)) {
        Some(Some(true)) => {}
        Some(Some(false)) => {
            notes.push(format!(
                "index increment differs from the period {}",
                target_increment
            ));
            return Ok(LevelVerdict::NotOptimal);
        }
        _ => {
            notes.push(String::from("index increment censored"));
            return Ok(LevelVerdict::Indeterminate);
        }
    }
    if new_mass.is_empty() {
        notes.push(String::from("no new positive mass at this level"));
        return Ok(LevelVerdict::NotOptimal);
    }
    for &(v, _) in new_mass {
        if v > bound {
            return Err(CyclesError::Internal(
                "new mass lies above the optimal valuation bound",
            ));
        }
    }
    if new_mass.iter().any(|&(v, _)| v < bound) {
        notes.push(format!(
            "new mass includes valuations below the optimal {}/{}",
            bound.numer(),
            bound.denom()
        ));
        return Ok(LevelVerdict::NotOptimal);
    }
    let _ = pgn;
    match simplicity {
        Simplicity::Simple(tag) => {
            notes.push(format!("all new points at the optimal valuation, simple ({})", tag));
            Ok(LevelVerdict::Optimal)
        }
        Simplicity::Unknown => {
            notes.push(String::from(
                "polygon conditions hold but simplicity could not be certified",
            ));
            Ok(LevelVerdict::Indeterminate)
        }
        Simplicity::Unchecked => {
            notes.push(String::from(
                "polygon conditions hold; simplicity unchecked on this backend",
            ));
            Ok(LevelVerdict::Indeterminate)
        }
        Simplicity::Multiple(_) => unreachable!("handled above"),
    }
}

fn checked_pow_u64(b: u64, e: u32) -> Result<u64, CyclesError> {
    let mut acc = 1u64;
    for _ in 0..e {
        acc = acc
            .checked_mul(b)
            .ok_or(CyclesError::Valued(ValuedError::Overflow))?;
    }
    Ok(acc)
}

// ---- power-of-Frobenius family ----

#[derive(Debug, Clone)]
pub struct FrobeniusRow {
    pub n: u32,
    pub index: CensoredNat,
    /// p^n * i_0 when i_0 is exact.
    pub expected: Option<u64>,
    pub matches: Option<bool>,
    /// Exact-backend confirmation that every positive valuation kept its
    /// place while its multiplicity scaled by p^n.
    pub mass_scaled: Option<bool>,
    pub multiple_certified: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct FrobeniusReport {
    pub p: u64,
    pub q: u64,
    pub i0: CensoredNat,
    pub rows: Vec<FrobeniusRow>,
    pub warnings: Vec<String>,
}

/// Analysis of maps `Q = lambda z S(z)^p` with S(0) = 1: the reduction has
/// `i_n = p^n i_0` for every n, so each level concentrates rather than
/// producing new cycles. Verified on the reduction profile and, where
/// degrees permit, on the polygons of the iterates.
pub fn frobenius_power_report(
    s: &OKPoly,
    lambda: &ValuedScalar,
    opts: &CycleOptions,
) -> Result<FrobeniusReport, CyclesError> {
    if !s.c[0].is_one() {
        return Err(CyclesError::Shape("S(0) must be exactly 1"));
    }
    if lambda.val() != CensoredVal::Exact(0) {
        return Err(CyclesError::NonUnitMultiplier);
    }
    let p = lambda.residue_char();
    let exact_backend = matches!(lambda, ValuedScalar::Rational(_));

    // Q = lambda z S^p
    let mut sp = OKPoly::constant(s.c[0].one_like());
    for _ in 0..p {
        sp = sp.mul(s);
    }
    let map = sp.shift_up(1).scale(lambda);

    let (field, reduced) = map.reduce()?;
    let germ = Germ::new(reduced).map_err(CyclesError::Series)?;
    let q = germ.q();
    debug_assert_eq!(field.p(), p);

    let mut warnings = Vec::new();
    if germ.is_exact_linear() {
        warnings.push(String::from("the reduction is linear; no finite level carries data"));
        return Ok(FrobeniusReport {
            p,
            q,
            i0: CensoredNat::Infinite,
            rows: Vec::new(),
            warnings,
        });
    }
    if !exact_backend {
        warnings.push(String::from(
            "truncated backend: polygon confirmation and multiplicity certificates disabled",
        ));
    }

    let i0 = ram_index(&germ, 0, TruncPolicy::Auto)?;
    let mut rows = Vec::new();
    let mut chain = IterateChain::start(map, opts.degree_ceiling)?;
    let mut base_mass: Option<Vec<(Rat, u64)>> = None;

    for n in 0..=opts.nmax {
        let index = ram_index(&germ, n, TruncPolicy::Auto)?;
        let expected = i0
            .exact_value()
            .and_then(|v| checked_pow_u64(p, n).ok().map(|pw| pw * v));
        let matches = expected.and_then(|e| index.known_eq(e));

        let period = q * checked_pow_u64(p, n)?;
        let (mass_scaled, multiple_certified) = if !exact_backend {
            (None, None)
        } else {
            match chain.advance_to(period) {
                Err(CyclesError::DegreeCeiling { .. }) => (None, None),
                Err(e) => return Err(e),
                Ok(iter) => {
                    let f = iter.sub_z();
                    let mut fvals = f.vals();
                    fvals[0] = CensoredVal::InfiniteZero;
                    match newton_polygon(&fvals) {
                        Err(_) => (None, None),
                        Ok(pgn) => {
                            let cur = pgn.positive_vals();
                            let scaled = match &base_mass {
                                None => {
                                    base_mass = Some(cur.clone());
                                    Some(true)
                                }
                                Some(base) => Some(
                                    cur.len() == base.len()
                                        && checked_pow_u64(p, n).map_or(false, |pw| {
                                            base.iter().all(|&(v, c)| {
                                                cur.iter().any(|&(cv, cc)| cv == v && cc == c * pw)
                                            })
                                        }),
                                ),
                            };
                            let mult = if n == 0 {
                                None
                            } else {
                                let stripped = f.shift_down(pgn.z_order() as usize)?;
                                match squarefree_status(
                                    &stripped,
                                    opts.seed ^ (n as u64),
                                    opts.exact_gcd_max_deg,
                                ) {
                                    Simplicity::Multiple(_) => Some(true),
                                    Simplicity::Simple(_) => Some(false),
                                    _ => None,
                                }
                            };
                            (scaled, mult)
                        }
                    }
                }
            }
        };

        rows.push(FrobeniusRow {
            n,
            index,
            expected,
            matches,
            mass_scaled,
            multiple_certified,
        });
    }

    Ok(FrobeniusReport {
        p,
        q,
        i0,
        rows,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valued::LaurentScalar;

    fn f3_map_lambda_z_1_plus_z() -> (OKPoly, ValuedScalar) {
        // P = (1+t) z (1 + z) over F_3(t), exact backend
        let field = ff_make(3, 1, None).unwrap();
        let one_plus_t = RatFun::from_poly(FPoly::from_coeffs(
            &field,
            vec![field.one(), field.one()],
        ));
        let lam = ValuedScalar::Rational(one_plus_t);
        let zero = ValuedScalar::Rational(RatFun::zero(&field));
        let map = OKPoly::new(vec![zero, lam.clone(), lam.clone()]);
        (map, lam)
    }

    #[test]
    fn flat_and_generic_multiplication_agree() {
        let (map, _) = f3_map_lambda_z_1_plus_z();
        let fast = map.mul(&map);
        let slow = OKPoly::new(poly_mul(
            map.coeffs(),
            map.coeffs(),
            &map.coeffs()[0].zero_like(),
        ));
        assert_eq!(fast, slow);
    }

    #[test]
    fn iterate_respects_ceiling() {
        let (map, _) = f3_map_lambda_z_1_plus_z();
        assert_eq!(iterate_okpoly(&map, 3, 10_000).unwrap().deg(), 8);
        assert!(matches!(
            iterate_okpoly(&map, 9, 100),
            Err(CyclesError::DegreeCeiling { .. })
        ));
    }

    #[test]
    fn optimal_family_over_f3() {
        let (map, _) = f3_map_lambda_z_1_plus_z();
        let report = cycle_report(&map, &CycleOptions::default()).unwrap();
        assert_eq!(report.p, 3);
        assert_eq!(report.q, 1);
        let idx: Vec<_> = report
            .reduction_profile
            .iter()
            .map(|&(_, v)| v.exact_value().unwrap())
            .collect();
        assert_eq!(idx, vec![1, 4, 13]);
        for lvl in &report.levels {
            assert_eq!(lvl.verdict, LevelVerdict::Optimal, "level {}", lvl.n);
        }
        // frozen polygon shape at n = 1: z_order 1, slopes -1 and -2/3
        let pgn = report.levels[1].polygon.as_ref().unwrap();
        assert_eq!(pgn.z_order(), 1);
        assert_eq!(pgn.mass_at(Rat::new(1, 1)), 1);
        assert_eq!(pgn.mass_at(Rat::new(2, 3)), 3);
        assert_eq!(report.levels[1].new_mass, vec![(Rat::new(2, 3), 3)]);
        assert_eq!(report.levels[1].bound_val, Some(Rat::new(2, 3)));
        // n = 2 digs out 9 more points at the same valuation
        assert_eq!(report.levels[2].new_mass, vec![(Rat::new(2, 3), 9)]);
    }

    #[test]
    fn concentration_versus_new_cycles_in_char_2() {
        let field = ff_make(2, 1, None).unwrap();
        let lam = ValuedScalar::Rational(RatFun::from_poly(FPoly::from_coeffs(
            &field,
            vec![field.one(), field.one()],
        )));
        let zero = ValuedScalar::Rational(RatFun::zero(&field));
        let lam_t = lam.mul(&ValuedScalar::Rational(RatFun::from_poly(FPoly::t(&field))));
        // lambda z (1 + z^2): every iterate minus z is a polynomial in
        // z^2 times z, so all periodic points are (at least) double
        let conc_map = OKPoly::new(vec![
            zero.clone(),
            lam.clone(),
            zero.clone(),
            lam.clone(),
        ]);
        let rep = cycle_report(&conc_map, &CycleOptions::default()).unwrap();
        assert_eq!(
            rep.levels.iter().map(|l| l.verdict).collect::<Vec<_>>(),
            vec![
                LevelVerdict::NotOptimal,
                LevelVerdict::Concentration,
                LevelVerdict::Concentration
            ]
        );
        // lambda z (1 + t z + z^2): same reduction, same polygons, but
        // the middle term makes the periodic points simple
        let new_map = OKPoly::new(vec![zero, lam.clone(), lam_t, lam.clone()]);
        let rep2 = cycle_report(&new_map, &CycleOptions::default()).unwrap();
        assert_eq!(
            rep2.levels.iter().map(|l| l.verdict).collect::<Vec<_>>(),
            vec![
                LevelVerdict::NotOptimal,
                LevelVerdict::Optimal,
                LevelVerdict::Optimal
            ]
        );
        // the polygons alone cannot tell the two maps apart
        let m1: Vec<_> = rep.levels.iter().map(|l| l.new_mass.clone()).collect();
        let m2: Vec<_> = rep2.levels.iter().map(|l| l.new_mass.clone()).collect();
        assert_eq!(m1, m2);
    }

    #[test]
    fn truncated_backend_reports_indeterminate_simplicity() {
        let field = ff_make(2, 1, None).unwrap();
        let lam = ValuedScalar::Laurent(LaurentScalar::from_coeffs(
            &field,
            0,
            vec![field.one(), field.one()],
            Some(24),
        ));
        let zero = ValuedScalar::Laurent(LaurentScalar::exact_zero(&field));
        let map = OKPoly::new(vec![zero.clone(), lam.clone(), zero, lam.clone()]);
        let rep = cycle_report(&map, &CycleOptions::default()).unwrap();
        assert_eq!(rep.levels[1].verdict, LevelVerdict::Indeterminate);
        assert_eq!(rep.levels[1].simplicity, Simplicity::Unchecked);
        // polygon itself is still fine at this window
        assert!(rep.levels[1].polygon.is_some());
        assert_eq!(rep.levels[1].new_mass, vec![(Rat::new(1, 2), 2)]);
    }

    #[test]
    fn frobenius_rows_scale_by_p() {
        let field = ff_make(2, 1, None).unwrap();
        let lam = ValuedScalar::Rational(RatFun::from_poly(FPoly::from_coeffs(
            &field,
            vec![field.one(), field.one()],
        )));
        let s = OKPoly::new(vec![
            ValuedScalar::Rational(RatFun::one(&field)),
            ValuedScalar::Rational(RatFun::one(&field)),
        ]);
        let rep = frobenius_power_report(&s, &lam, &CycleOptions::default()).unwrap();
        assert_eq!(rep.i0, CensoredNat::Exact(2));
        for row in &rep.rows {
            assert_eq!(row.matches, Some(true));
            assert_eq!(row.mass_scaled, Some(true));
            if row.n >= 1 {
                assert_eq!(row.multiple_certified, Some(true));
            }
        }
    }

    #[test]
    fn degenerate_linear_reduction() {
        let field = ff_make(3, 1, None).unwrap();
        let t_poly = RatFun::from_poly(FPoly::from_coeffs(
            &field,
            vec![field.zero(), field.one()],
        ));
        let lam = ValuedScalar::Rational(RatFun::from_poly(FPoly::from_coeffs(
            &field,
            vec![field.one(), field.one()],
        )));
        let zero = ValuedScalar::Rational(RatFun::zero(&field));
        // P = lambda z (1 + t z): reduces to z
        let map = OKPoly::new(vec![zero, lam.clone(), lam.mul(&ValuedScalar::Rational(t_poly))]);
        let rep = cycle_report(&map, &CycleOptions::default()).unwrap();
        assert!(rep.degenerate_linear);
        assert!(rep.levels.is_empty());
    }

    #[test]
    fn shape_errors() {
        let field = ff_make(3, 1, None).unwrap();
        let one = ValuedScalar::Rational(RatFun::one(&field));
        let zero = ValuedScalar::Rational(RatFun::zero(&field));
        let t_scalar = ValuedScalar::Rational(RatFun::from_poly(FPoly::t(&field)));
        assert!(matches!(
            cycle_report(&OKPoly::new(vec![one.clone(), one.clone()]), &CycleOptions::default()),
            Err(CyclesError::Shape(_))
        ));
        assert!(matches!(
            cycle_report(&OKPoly::new(vec![zero, t_scalar, one]), &CycleOptions::default()),
            Err(CyclesError::NonUnitMultiplier)
        ));
    }
}
