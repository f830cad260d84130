//! Coefficient scalars carrying an ultrametric valuation, in three
//! backends:
//!
//! * `Laurent`: truncated Laurent series over a finite field, t-adic
//!   valuation, explicit censoring window;
//! * `Padic`: integers mod p^prec, p-adic valuation, censoring at prec;
//! * `Rational`: exact rational functions over a finite field, t-adic
//!   valuation, no censoring.
//!
//! Valuations are reported as `CensoredVal` so that a window that cannot
//! distinguish 0 from small is never read as a statement of exactness.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::censored::Rat;
use crate::coeff::{poly_mul, Ring};
use crate::ff::{FFElem, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValuedError {
    FieldMismatch,
    DivisionByZero,
    /// The censoring window hides the valuation the query needs.
    IndeterminateValuation,
    /// `lambda^m = 1` exactly: the multiplier is a root of unity and the
    /// distance-to-identity valuation is infinite.
    DegenerateLambda,
    /// The multiplier must have valuation zero.
    NonUnitLambda,
    PrecisionTooLarge { p: u64, prec: u32 },
    /// A coefficient with negative valuation cannot be reduced.
    NotIntegral,
    Overflow,
}

impl fmt::Display for ValuedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuedError::FieldMismatch => write!(f, "scalars from different domains"),
            ValuedError::DivisionByZero => write!(f, "division by zero"),
            ValuedError::IndeterminateValuation => {
                write!(f, "valuation indeterminate at this truncation")
            }
            ValuedError::DegenerateLambda => {
                write!(f, "multiplier power equals 1 exactly; valuation is infinite")
            }
            ValuedError::NonUnitLambda => write!(f, "multiplier must have valuation 0"),
            ValuedError::PrecisionTooLarge { p, prec } => {
                write!(f, "p^prec overflows u64: p={}, prec={}", p, prec)
            }
            ValuedError::NotIntegral => write!(f, "coefficient has negative valuation"),
            ValuedError::Overflow => write!(f, "exponent overflow"),
        }
    }
}

/// t-adic or p-adic valuation of a single scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CensoredVal {
    Exact(i64),
    /// Known only to be at least this; the element may even be zero.
    AtLeast(i64),
    /// The element is exactly zero.
    InfiniteZero,
}

impl CensoredVal {
    pub fn exact_value(self) -> Option<i64> {
        match self {
            CensoredVal::Exact(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, CensoredVal::Exact(_))
    }
}

impl fmt::Display for CensoredVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CensoredVal::Exact(v) => write!(f, "{}", v),
            CensoredVal::AtLeast(v) => write!(f, ">={}", v),
            CensoredVal::InfiniteZero => write!(f, "inf"),
        }
    }
}

/// Dense polynomial in t over a finite field. Trailing zeros are trimmed;
/// the zero polynomial stores nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FPoly {
    field: Arc<FieldSpec>,
    c: Vec<FFElem>,
}

impl FPoly {
    pub fn zero(field: &Arc<FieldSpec>) -> FPoly {
        FPoly {
            field: field.clone(),
            c: Vec::new(),
        }
    }

    pub fn one(field: &Arc<FieldSpec>) -> FPoly {
        FPoly::from_coeffs(field, vec![field.one()])
    }

    pub fn t(field: &Arc<FieldSpec>) -> FPoly {
        FPoly::from_coeffs(field, vec![field.zero(), field.one()])
    }

    pub fn constant(x: FFElem) -> FPoly {
        let field = x.spec().clone();
        FPoly::from_coeffs(&field, vec![x])
    }

    pub fn from_coeffs(field: &Arc<FieldSpec>, mut c: Vec<FFElem>) -> FPoly {
        while c.last().map_or(false, |v| v.is_zero()) {
            c.pop();
        }
        FPoly {
            field: field.clone(),
            c,
        }
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn coeffs(&self) -> &[FFElem] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> FFElem {
        self.c.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn ord_t(&self) -> Option<usize> {
        self.c.iter().position(|v| !v.is_zero())
    }

    pub fn lead(&self) -> Option<&FFElem> {
        self.c.last()
    }

    pub fn add(&self, rhs: &FPoly) -> FPoly {
        let n = self.c.len().max(rhs.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).add(&rhs.coeff(i)));
        }
        FPoly::from_coeffs(&self.field, out)
    }

    pub fn neg(&self) -> FPoly {
        FPoly {
            field: self.field.clone(),
            c: self.c.iter().map(|v| v.neg()).collect(),
        }
    }

    pub fn sub(&self, rhs: &FPoly) -> FPoly {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &FPoly) -> FPoly {
        if self.is_zero() || rhs.is_zero() {
            return FPoly::zero(&self.field);
        }
        FPoly::from_coeffs(&self.field, poly_mul(&self.c, &rhs.c, &self.field.zero()))
    }

    pub fn mul_ff(&self, s: &FFElem) -> FPoly {
        FPoly::from_coeffs(&self.field, self.c.iter().map(|v| v.mul(s)).collect())
    }

    /// Multiply by t^k.
    pub fn shift(&self, k: usize) -> FPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![self.field.zero(); k];
        c.extend(self.c.iter().cloned());
        FPoly {
            field: self.field.clone(),
            c,
        }
    }

    pub fn divrem(&self, d: &FPoly) -> Result<(FPoly, FPoly), ValuedError> {
        let dd = d.deg().ok_or(ValuedError::DivisionByZero)?;
        let lead_inv = d.c[dd].inv().map_err(|_| ValuedError::DivisionByZero)?;
        let mut r = self.c.clone();
        let mut qc = vec![self.field.zero(); self.c.len().saturating_sub(dd)];
        while r.len() > dd || (r.len() == dd + 1 && dd == 0) {
            if r.last().map_or(true, |v| v.is_zero()) {
                if r.is_empty() {
                    break;
                }
                r.pop();
                continue;
            }
            let shift = r.len() - 1 - dd;
            let f = r.last().unwrap().mul(&lead_inv);
            for i in 0..=dd {
                let t = f.mul(&d.c[i]);
                r[shift + i] = r[shift + i].sub(&t);
            }
            qc[shift] = f;
            r.pop();
        }
        Ok((
            FPoly::from_coeffs(&self.field, qc),
            FPoly::from_coeffs(&self.field, r),
        ))
    }

    pub fn monic(&self) -> FPoly {
        match self.lead() {
            None => self.clone(),
            Some(l) => self.mul_ff(&l.inv().expect("nonzero lead")),
        }
    }

    pub fn gcd(a: &FPoly, b: &FPoly) -> Result<FPoly, ValuedError> {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.divrem(&y)?;
            x = y;
            y = r;
        }
        Ok(x.monic())
    }

    /// Evaluate with coefficients mapped into another field first; used for
    /// specializing t over an extension.
    pub fn eval_map<F: Fn(&FFElem) -> FFElem>(&self, f: &F, x: &FFElem) -> FFElem {
        let mut acc = x.zero_like();
        for c in self.c.iter().rev() {
            acc = acc.mul(x).add(&f(c));
        }
        acc
    }

    pub fn eval(&self, x: &FFElem) -> FFElem {
        self.eval_map(&|c: &FFElem| c.clone(), x)
    }
}

/// Truncated Laurent series over a finite field. Stored window covers
/// exponents `lo .. lo + c.len()`; exponents below `lo` are known zeros;
/// with `cut = Some(k)` the window ends at k and exponents >= k are
/// unknown, with `cut = None` the value is exact. After normalization
/// either `c` is empty (zero: exact if `cut` is `None`, censored with
/// `lo = k` otherwise) or `c[0]` is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentScalar {
    field: Arc<FieldSpec>,
    lo: i64,
    c: Vec<FFElem>,
    cut: Option<i64>,
}

impl LaurentScalar {
    pub fn exact_zero(field: &Arc<FieldSpec>) -> LaurentScalar {
        LaurentScalar {
            field: field.clone(),
            lo: 0,
            c: Vec::new(),
            cut: None,
        }
    }

    pub fn one(field: &Arc<FieldSpec>) -> LaurentScalar {
        LaurentScalar::from_ff(field.one())
    }

    pub fn from_ff(x: FFElem) -> LaurentScalar {
        let field = x.spec().clone();
        LaurentScalar {
            field,
            lo: 0,
            c: vec![x],
            cut: None,
        }
        .normalized()
    }

    pub fn t_power(field: &Arc<FieldSpec>, e: i64) -> LaurentScalar {
        LaurentScalar {
            field: field.clone(),
            lo: e,
            c: vec![field.one()],
            cut: None,
        }
    }

    /// Coefficients cover exponents `lo..lo+c.len()`; exponents from there
    /// up to `cut` are declared zero; beyond `cut` nothing is claimed.
    pub fn from_coeffs(
        field: &Arc<FieldSpec>,
        lo: i64,
        c: Vec<FFElem>,
        cut: Option<i64>,
    ) -> LaurentScalar {
        LaurentScalar {
            field: field.clone(),
            lo,
            c,
            cut,
        }
        .normalized()
    }

    fn normalized(mut self) -> LaurentScalar {
        match self.cut {
            Some(k) => {
                if self.lo >= k {
                    self.c.clear();
                    self.lo = k;
                } else {
                    let window = (k - self.lo) as usize;
                    self.c.truncate(window);
                    self.c.resize(window, self.field.zero());
                    let lead = self.c.iter().position(|v| !v.is_zero());
                    match lead {
                        Some(0) => {}
                        Some(j) => {
                            self.c.drain(..j);
                            self.lo += j as i64;
                        }
                        None => {
                            self.c.clear();
                            self.lo = k;
                        }
                    }
                }
            }
            None => {
                while self.c.last().map_or(false, |v| v.is_zero()) {
                    self.c.pop();
                }
                let lead = self.c.iter().position(|v| !v.is_zero());
                match lead {
                    Some(0) => {}
                    Some(j) => {
                        self.c.drain(..j);
                        self.lo += j as i64;
                    }
                    None => {
                        self.c.clear();
                        self.lo = 0;
                    }
                }
            }
        }
        self
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn cut(&self) -> Option<i64> {
        self.cut
    }

    pub fn window(&self) -> &[FFElem] {
        &self.c
    }

    /// Known coefficient at exponent e; `None` when e is past the window.
    pub fn coeff_at(&self, e: i64) -> Option<FFElem> {
        if let Some(k) = self.cut {
            if e >= k {
                return None;
            }
        }
        if e < self.lo {
            return Some(self.field.zero());
        }
        let i = (e - self.lo) as usize;
        Some(self.c.get(i).cloned().unwrap_or_else(|| self.field.zero()))
    }

    pub fn val(&self) -> CensoredVal {
        if !self.c.is_empty() {
            CensoredVal::Exact(self.lo)
        } else {
            match self.cut {
                Some(k) => CensoredVal::AtLeast(k),
                None => CensoredVal::InfiniteZero,
            }
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.c.is_empty() && self.cut.is_none()
    }

    pub fn is_one(&self) -> bool {
        self.cut.is_none() && self.lo == 0 && self.c.len() == 1 && self.c[0].is_one()
    }

    fn end(&self) -> i64 {
        self.lo + self.c.len() as i64
    }

    pub fn add(&self, rhs: &LaurentScalar) -> LaurentScalar {
        debug_assert!(self.field.as_ref() == rhs.field.as_ref());
        let cut = match (self.cut, rhs.cut) {
            (None, None) => None,
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        let lo = self.lo.min(rhs.lo);
        let hi = match cut {
            Some(k) => k,
            None => self.end().max(rhs.end()),
        };
        let mut c = Vec::new();
        let mut e = lo;
        while e < hi {
            let a = self.coeff_at(e).expect("inside both windows");
            let b = rhs.coeff_at(e).expect("inside both windows");
            c.push(a.add(&b));
            e += 1;
        }
        LaurentScalar {
            field: self.field.clone(),
            lo,
            c,
            cut,
        }
        .normalized()
    }

    pub fn neg(&self) -> LaurentScalar {
        LaurentScalar {
            field: self.field.clone(),
            lo: self.lo,
            c: self.c.iter().map(|v| v.neg()).collect(),
            cut: self.cut,
        }
    }

    pub fn sub(&self, rhs: &LaurentScalar) -> LaurentScalar {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &LaurentScalar) -> LaurentScalar {
        debug_assert!(self.field.as_ref() == rhs.field.as_ref());
        if self.is_exact_zero() || rhs.is_exact_zero() {
            return LaurentScalar::exact_zero(&self.field);
        }
        let cut = match (self.cut, rhs.cut) {
            (None, None) => None,
            (Some(a), None) => Some(rhs.lo + a),
            (None, Some(b)) => Some(self.lo + b),
            (Some(a), Some(b)) => Some((rhs.lo + a).min(self.lo + b)),
        };
        if self.c.is_empty() || rhs.c.is_empty() {
            return LaurentScalar {
                field: self.field.clone(),
                lo: self.lo + rhs.lo,
                c: Vec::new(),
                cut,
            }
            .normalized();
        }
        let c = poly_mul(&self.c, &rhs.c, &self.field.zero());
        LaurentScalar {
            field: self.field.clone(),
            lo: self.lo + rhs.lo,
            c,
            cut,
        }
        .normalized()
    }

    pub fn pow(&self, e: u64) -> LaurentScalar {
        let mut acc = LaurentScalar::one(&self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Inverse computed to `window` known coefficients. Exact monomials
    /// invert exactly; anything else yields a truncated result.
    pub fn recip_window(&self, window: usize) -> Result<LaurentScalar, ValuedError> {
        if self.c.is_empty() {
            return Err(match self.cut {
                Some(_) => ValuedError::IndeterminateValuation,
                None => ValuedError::DivisionByZero,
            });
        }
        let v = self.lo;
        if self.cut.is_none() && self.c.len() == 1 {
            let u = self.c[0].inv().map_err(|_| ValuedError::DivisionByZero)?;
            return Ok(LaurentScalar {
                field: self.field.clone(),
                lo: -v,
                c: vec![u],
                cut: None,
            });
        }
        let avail = match self.cut {
            Some(k) => (k - self.lo) as usize,
            None => window.max(1),
        };
        let len = window.max(1).min(avail);
        let u0_inv = self.c[0].inv().map_err(|_| ValuedError::DivisionByZero)?;
        let mut r: Vec<FFElem> = Vec::with_capacity(len);
        r.push(u0_inv.clone());
        for j in 1..len {
            let mut s = self.field.zero();
            for i in 1..=j {
                let ui = self.c.get(i).cloned().unwrap_or_else(|| self.field.zero());
                s = s.add(&ui.mul(&r[j - i]));
            }
            r.push(s.neg().mul(&u0_inv));
        }
        Ok(LaurentScalar {
            field: self.field.clone(),
            lo: -v,
            c: r,
            cut: Some(-v + len as i64),
        }
        .normalized())
    }

    pub fn div(&self, rhs: &LaurentScalar, window: usize) -> Result<LaurentScalar, ValuedError> {
        Ok(self.mul(&rhs.recip_window(window)?))
    }

    /// Reduction to the residue field: the t^0 coefficient, requiring
    /// provable integrality and a window that reaches 0.
    pub fn residue(&self) -> Result<FFElem, ValuedError> {
        if !self.c.is_empty() && self.lo < 0 {
            return Err(ValuedError::NotIntegral);
        }
        self.coeff_at(0).ok_or(ValuedError::IndeterminateValuation)
    }
}

/// Integer mod p^prec with the p-adic valuation; residues censor anything
/// at or above valuation prec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicScalar {
    p: u64,
    prec: u32,
    modulus: u64,
    v: u64,
}

impl PadicScalar {
    pub fn new(p: u64, prec: u32, value: i64) -> Result<PadicScalar, ValuedError> {
        assert!(p >= 2 && prec >= 1);
        let mut m: u64 = 1;
        for _ in 0..prec {
            m = m
                .checked_mul(p)
                .ok_or(ValuedError::PrecisionTooLarge { p, prec })?;
        }
        let v = (value as i128).rem_euclid(m as i128) as u64;
        Ok(PadicScalar {
            p,
            prec,
            modulus: m,
            v,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn value(&self) -> u64 {
        self.v
    }

    fn with_value(&self, v: u64) -> PadicScalar {
        PadicScalar {
            v: v % self.modulus,
            ..*self
        }
    }

    /// Reduce both operands to the coarser precision.
    fn align(&self, rhs: &PadicScalar) -> (PadicScalar, PadicScalar) {
        debug_assert_eq!(self.p, rhs.p);
        if self.prec == rhs.prec {
            return (*self, *rhs);
        }
        let prec = self.prec.min(rhs.prec);
        let m = if self.prec < rhs.prec {
            self.modulus
        } else {
            rhs.modulus
        };
        let a = PadicScalar {
            p: self.p,
            prec,
            modulus: m,
            v: self.v % m,
        };
        let b = PadicScalar {
            p: self.p,
            prec,
            modulus: m,
            v: rhs.v % m,
        };
        (a, b)
    }

    pub fn add(&self, rhs: &PadicScalar) -> PadicScalar {
        let (a, b) = self.align(rhs);
        a.with_value(((a.v as u128 + b.v as u128) % a.modulus as u128) as u64)
    }

    pub fn neg(&self) -> PadicScalar {
        self.with_value(if self.v == 0 { 0 } else { self.modulus - self.v })
    }

    pub fn sub(&self, rhs: &PadicScalar) -> PadicScalar {
        let (a, b) = self.align(rhs);
        a.add(&b.neg())
    }

    pub fn mul(&self, rhs: &PadicScalar) -> PadicScalar {
        let (a, b) = self.align(rhs);
        a.with_value(((a.v as u128 * b.v as u128) % a.modulus as u128) as u64)
    }

    pub fn pow(&self, e: u64) -> PadicScalar {
        let mut acc = self.with_value(1);
        let mut base = *self;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self) -> Result<PadicScalar, ValuedError> {
        if self.v % self.p == 0 {
            return Err(ValuedError::DivisionByZero);
        }
        // extended Euclid for v^{-1} mod p^prec
        let (mut r0, mut r1) = (self.modulus as i128, self.v as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            let r2 = r0 - q * r1;
            let s2 = s0 - q * s1;
            r0 = r1;
            r1 = r2;
            s0 = s1;
            s1 = s2;
        }
        debug_assert_eq!(r0, 1);
        Ok(self.with_value(s0.rem_euclid(self.modulus as i128) as u64))
    }

    pub fn val(&self) -> CensoredVal {
        if self.v == 0 {
            return CensoredVal::AtLeast(self.prec as i64);
        }
        let mut v = self.v;
        let mut e = 0i64;
        while v % self.p == 0 {
            v /= self.p;
            e += 1;
        }
        CensoredVal::Exact(e)
    }

    pub fn is_one(&self) -> bool {
        self.v == 1
    }

    pub fn residue(&self, field: &Arc<FieldSpec>) -> Result<FFElem, ValuedError> {
        if field.p() != self.p || field.k() != 1 {
            return Err(ValuedError::FieldMismatch);
        }
        Ok(field.from_int((self.v % self.p) as i64))
    }
}

/// Exact rational function num/den over a finite field, reduced, den monic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFun {
    num: FPoly,
    den: FPoly,
}

impl RatFun {
    pub fn new(num: FPoly, den: FPoly) -> Result<RatFun, ValuedError> {
        if den.is_zero() {
            return Err(ValuedError::DivisionByZero);
        }
        let field = num.field().clone();
        if num.is_zero() {
            return Ok(RatFun {
                num,
                den: FPoly::one(&field),
            });
        }
        let g = FPoly::gcd(&num, &den)?;
        let (num, den) = if g.deg() == Some(0) {
            (num, den)
        } else {
            let (n, rn) = num.divrem(&g)?;
            let (d, rd) = den.divrem(&g)?;
            debug_assert!(rn.is_zero() && rd.is_zero());
            (n, d)
        };
        let lead_inv = den.lead().expect("nonzero").inv().expect("nonzero lead");
        Ok(RatFun {
            num: num.mul_ff(&lead_inv),
            den: den.mul_ff(&lead_inv),
        })
    }

    pub fn from_poly(p: FPoly) -> RatFun {
        let field = p.field().clone();
        RatFun {
            num: p,
            den: FPoly::one(&field),
        }
    }

    pub fn zero(field: &Arc<FieldSpec>) -> RatFun {
        RatFun::from_poly(FPoly::zero(field))
    }

    pub fn one(field: &Arc<FieldSpec>) -> RatFun {
        RatFun::from_poly(FPoly::one(field))
    }

    pub fn num(&self) -> &FPoly {
        &self.num
    }

    pub fn den(&self) -> &FPoly {
        &self.den
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        self.num.field()
    }

    pub fn den_is_one(&self) -> bool {
        self.den.deg() == Some(0) && self.den.coeff(0).is_one()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den_is_one() && self.num.deg() == Some(0) && self.num.coeff(0).is_one()
    }

    pub fn add(&self, rhs: &RatFun) -> RatFun {
        if self.den_is_one() && rhs.den_is_one() {
            return RatFun::from_poly(self.num.add(&rhs.num));
        }
        RatFun::new(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
        .expect("nonzero denominator")
    }

    pub fn neg(&self) -> RatFun {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, rhs: &RatFun) -> RatFun {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &RatFun) -> RatFun {
        if self.den_is_one() && rhs.den_is_one() {
            return RatFun::from_poly(self.num.mul(&rhs.num));
        }
        RatFun::new(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
            .expect("nonzero denominator")
    }

    pub fn inv(&self) -> Result<RatFun, ValuedError> {
        if self.is_zero() {
            return Err(ValuedError::DivisionByZero);
        }
        RatFun::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, rhs: &RatFun) -> Result<RatFun, ValuedError> {
        Ok(self.mul(&rhs.inv()?))
    }

    pub fn pow(&self, e: u64) -> RatFun {
        let mut acc = RatFun::one(self.field());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn val(&self) -> CensoredVal {
        match self.num.ord_t() {
            None => CensoredVal::InfiniteZero,
            Some(vn) => {
                let vd = self.den.ord_t().expect("nonzero denominator");
                CensoredVal::Exact(vn as i64 - vd as i64)
            }
        }
    }

    /// Reduction to the residue field: value at t = 0. Reducedness means a
    /// vanishing denominator at 0 implies negative valuation.
    pub fn residue(&self) -> Result<FFElem, ValuedError> {
        let d0 = self.den.coeff(0);
        if d0.is_zero() {
            return Err(ValuedError::NotIntegral);
        }
        self.num.coeff(0).div(&d0).map_err(|_| ValuedError::DivisionByZero)
    }
}

/// A scalar from one of the three valued backends.
#[derive(Debug, Clone, PartialEq)]
pub enum ValuedScalar {
    Laurent(LaurentScalar),
    Padic(PadicScalar),
    Rational(RatFun),
}

impl ValuedScalar {
    pub fn val(&self) -> CensoredVal {
        match self {
            ValuedScalar::Laurent(x) => x.val(),
            ValuedScalar::Padic(x) => x.val(),
            ValuedScalar::Rational(x) => x.val(),
        }
    }

    pub fn residue_char(&self) -> u64 {
        match self {
            ValuedScalar::Laurent(x) => x.field().p(),
            ValuedScalar::Padic(x) => x.p(),
            ValuedScalar::Rational(x) => x.field().p(),
        }
    }

    /// Residue field of the backend.
    pub fn residue_field(&self) -> Result<Arc<FieldSpec>, crate::ff::FieldError> {
        match self {
            ValuedScalar::Laurent(x) => Ok(x.field().clone()),
            ValuedScalar::Rational(x) => Ok(x.field().clone()),
            ValuedScalar::Padic(x) => crate::ff::ff_make(x.p(), 1, None),
        }
    }

    pub fn residue(&self, field: &Arc<FieldSpec>) -> Result<FFElem, ValuedError> {
        match self {
            ValuedScalar::Laurent(x) => x.residue(),
            ValuedScalar::Rational(x) => x.residue(),
            ValuedScalar::Padic(x) => x.residue(field),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            ValuedScalar::Laurent(x) => x.is_one(),
            ValuedScalar::Padic(x) => x.is_one(),
            ValuedScalar::Rational(x) => x.is_one(),
        }
    }

    pub fn pow(&self, e: u64) -> ValuedScalar {
        match self {
            ValuedScalar::Laurent(x) => ValuedScalar::Laurent(x.pow(e)),
            ValuedScalar::Padic(x) => ValuedScalar::Padic(x.pow(e)),
            ValuedScalar::Rational(x) => ValuedScalar::Rational(x.pow(e)),
        }
    }
}

impl Ring for ValuedScalar {
    fn same_domain(&self, other: &Self) -> bool {
        match (self, other) {
            (ValuedScalar::Laurent(a), ValuedScalar::Laurent(b)) => {
                a.field().as_ref() == b.field().as_ref()
            }
            (ValuedScalar::Padic(a), ValuedScalar::Padic(b)) => a.p() == b.p(),
            (ValuedScalar::Rational(a), ValuedScalar::Rational(b)) => {
                a.field().as_ref() == b.field().as_ref()
            }
            _ => false,
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            ValuedScalar::Laurent(x) => x.is_exact_zero(),
            // a zero residue may hide anything of valuation >= prec
            ValuedScalar::Padic(_) => false,
            ValuedScalar::Rational(x) => x.is_zero(),
        }
    }

    fn zero_like(&self) -> Self {
        match self {
            ValuedScalar::Laurent(x) => ValuedScalar::Laurent(LaurentScalar::exact_zero(x.field())),
            ValuedScalar::Padic(x) => ValuedScalar::Padic(x.with_value(0)),
            ValuedScalar::Rational(x) => ValuedScalar::Rational(RatFun::zero(x.field())),
        }
    }

    fn one_like(&self) -> Self {
        match self {
            ValuedScalar::Laurent(x) => ValuedScalar::Laurent(LaurentScalar::one(x.field())),
            ValuedScalar::Padic(x) => ValuedScalar::Padic(x.with_value(1)),
            ValuedScalar::Rational(x) => ValuedScalar::Rational(RatFun::one(x.field())),
        }
    }

    fn add(&self, rhs: &Self) -> Self {
        match (self, rhs) {
            (ValuedScalar::Laurent(a), ValuedScalar::Laurent(b)) => {
                ValuedScalar::Laurent(a.add(b))
            }
            (ValuedScalar::Padic(a), ValuedScalar::Padic(b)) => ValuedScalar::Padic(a.add(b)),
            (ValuedScalar::Rational(a), ValuedScalar::Rational(b)) => {
                ValuedScalar::Rational(a.add(b))
            }
            _ => panic!("mixed scalar backends"),
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn neg(&self) -> Self {
        match self {
            ValuedScalar::Laurent(x) => ValuedScalar::Laurent(x.neg()),
            ValuedScalar::Padic(x) => ValuedScalar::Padic(x.neg()),
            ValuedScalar::Rational(x) => ValuedScalar::Rational(x.neg()),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        match (self, rhs) {
            (ValuedScalar::Laurent(a), ValuedScalar::Laurent(b)) => {
                ValuedScalar::Laurent(a.mul(b))
            }
            (ValuedScalar::Padic(a), ValuedScalar::Padic(b)) => ValuedScalar::Padic(a.mul(b)),
            (ValuedScalar::Rational(a), ValuedScalar::Rational(b)) => {
                ValuedScalar::Rational(a.mul(b))
            }
            _ => panic!("mixed scalar backends"),
        }
    }
}

/// Valuation of `lambda^m - 1` for a unit lambda.
pub fn lambda_power_val(lambda: &ValuedScalar, m: u64) -> Result<CensoredVal, ValuedError> {
    if lambda.val() != CensoredVal::Exact(0) {
        return Err(ValuedError::NonUnitLambda);
    }
    let w = lambda.pow(m).sub(&lambda.one_like());
    Ok(w.val())
}

/// The optimal-distance valuation at level n:
/// `val(lambda^{q p^n} - 1) / q` for n = 0 and
/// `(val(lambda^{q p^n} - 1) - val(lambda^{q p^{n-1}} - 1)) / (q p^n)`
/// for n >= 1.
pub fn bound_valuation(lambda: &ValuedScalar, q: u64, n: u32) -> Result<Rat, ValuedError> {
    let p = lambda.residue_char();
    let pn = checked_pow(p, n)?;
    let m_n = q.checked_mul(pn).ok_or(ValuedError::Overflow)?;
    let v_n = read_exact(lambda_power_val(lambda, m_n)?)?;
    if n == 0 {
        return Ok(Rat::new(v_n, q as i64));
    }
    let m_prev = m_n / p;
    let v_prev = read_exact(lambda_power_val(lambda, m_prev)?)?;
    Ok(Rat::new(v_n - v_prev, m_n as i64))
}

fn read_exact(v: CensoredVal) -> Result<i64, ValuedError> {
    match v {
        CensoredVal::Exact(e) => Ok(e),
        CensoredVal::AtLeast(_) => Err(ValuedError::IndeterminateValuation),
        CensoredVal::InfiniteZero => Err(ValuedError::DegenerateLambda),
    }
}

fn checked_pow(b: u64, e: u32) -> Result<u64, ValuedError> {
    let mut acc = 1u64;
    for _ in 0..e {
        acc = acc.checked_mul(b).ok_or(ValuedError::Overflow)?;
    }
    Ok(acc)
}

/// Expand an exact rational function into a truncated Laurent series with
/// `window` known coefficients; used to cross-check the two t-adic
/// backends against each other.
pub fn rational_to_laurent(rf: &RatFun, window: usize) -> Result<LaurentScalar, ValuedError> {
    let field = rf.field();
    let num = LaurentScalar::from_coeffs(field, 0, rf.num().coeffs().to_vec(), None);
    let den = LaurentScalar::from_coeffs(field, 0, rf.den().coeffs().to_vec(), None);
    num.div(&den, window)
}
