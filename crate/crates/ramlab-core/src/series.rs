//! Truncated formal power series over a coefficient ring, and germs
//! (series fixing 0 with invertible linear part) over a finite field.
//!
//! A series stores exactly `trunc` coefficients `c_0 .. c_{trunc-1}`; all
//! higher terms are unknown unless the `exact` flag says the stored data is
//! a complete polynomial. Every operation returns the tightest truncation it
//! can prove, never more.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::censored::CensoredNat;
use crate::coeff::Ring;
use crate::ff::{mult_order, FFElem, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesError {
    FieldMismatch,
    /// Composition `f(g)` needs `g(0) = 0` on truncated data.
    NonzeroConstantInner,
    /// Compositional inverse or reciprocal of a non-unit.
    NotInvertible,
    /// A germ needs zero constant term and nonzero linear coefficient.
    GermShape(&'static str),
    /// The stored window is too short and the tail is not known to be zero.
    TruncationTooSmall,
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::FieldMismatch => write!(f, "coefficient domains differ"),
            SeriesError::NonzeroConstantInner => {
                write!(f, "inner series of a composition must have zero constant term")
            }
            SeriesError::NotInvertible => write!(f, "series is not invertible"),
            SeriesError::GermShape(msg) => write!(f, "not a germ: {}", msg),
            SeriesError::TruncationTooSmall => write!(f, "truncation window too small"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series<R: Ring> {
    coeffs: Vec<R>,
    /// True when every coefficient past the stored window is known zero,
    /// i.e. the series is a complete polynomial.
    exact: bool,
}

impl<R: Ring> Series<R> {
    pub fn from_coeffs(coeffs: Vec<R>, exact: bool) -> Series<R> {
        assert!(!coeffs.is_empty(), "a series stores at least one coefficient");
        Series { coeffs, exact }
    }

    pub fn zero_like(sample: &R, trunc: usize) -> Series<R> {
        Series {
            coeffs: vec![sample.zero_like(); trunc.max(1)],
            exact: true,
        }
    }

    /// The identity series `z`, truncated at `trunc >= 2`.
    pub fn identity_like(sample: &R, trunc: usize) -> Series<R> {
        assert!(trunc >= 2);
        let mut coeffs = vec![sample.zero_like(); trunc];
        coeffs[1] = sample.one_like();
        Series {
            coeffs,
            exact: true,
        }
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Option<&R> {
        self.coeffs.get(i)
    }

    /// Degree of the stored polynomial part: highest index with a nonzero
    /// coefficient, if any.
    pub fn stored_degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    /// Restrict or (for exact polynomials) zero-extend the window.
    pub fn with_trunc(&self, trunc: usize) -> Result<Series<R>, SeriesError> {
        let trunc = trunc.max(1);
        if trunc <= self.coeffs.len() {
            let dropped_nonzero = self.coeffs[trunc..].iter().any(|c| !c.is_zero());
            Ok(Series {
                coeffs: self.coeffs[..trunc].to_vec(),
                exact: self.exact && !dropped_nonzero,
            })
        } else if self.exact {
            let mut coeffs = self.coeffs.clone();
            coeffs.resize(trunc, self.coeffs[0].zero_like());
            Ok(Series {
                coeffs,
                exact: true,
            })
        } else {
            Err(SeriesError::TruncationTooSmall)
        }
    }

    fn check_domains(&self, rhs: &Series<R>) -> Result<(), SeriesError> {
        if self.coeffs[0].same_domain(&rhs.coeffs[0]) {
            Ok(())
        } else {
            Err(SeriesError::FieldMismatch)
        }
    }
}

pub fn s_add<R: Ring>(f: &Series<R>, g: &Series<R>) -> Result<Series<R>, SeriesError> {
    f.check_domains(g)?;
    let tr = f.trunc().min(g.trunc());
    let coeffs: Vec<R> = (0..tr).map(|i| f.coeffs[i].add(&g.coeffs[i])).collect();
    let exact = f.exact
        && g.exact
        && f.stored_degree().map_or(true, |d| d < tr)
        && g.stored_degree().map_or(true, |d| d < tr);
    Ok(Series { coeffs, exact })
}

pub fn s_sub<R: Ring>(f: &Series<R>, g: &Series<R>) -> Result<Series<R>, SeriesError> {
    f.check_domains(g)?;
    let tr = f.trunc().min(g.trunc());
    let coeffs: Vec<R> = (0..tr).map(|i| f.coeffs[i].sub(&g.coeffs[i])).collect();
    let exact = f.exact
        && g.exact
        && f.stored_degree().map_or(true, |d| d < tr)
        && g.stored_degree().map_or(true, |d| d < tr);
    Ok(Series { coeffs, exact })
}

pub fn s_mul<R: Ring>(f: &Series<R>, g: &Series<R>) -> Result<Series<R>, SeriesError> {
    f.check_domains(g)?;
    let tr = f.trunc().min(g.trunc());
    let zero = f.coeffs[0].zero_like();
    let mut coeffs = vec![zero; tr];
    R::mul_block(&mut coeffs, &f.coeffs, &g.coeffs);
    let exact = f.exact
        && g.exact
        && match (f.stored_degree(), g.stored_degree()) {
            (Some(df), Some(dg)) => df + dg < tr,
            _ => true, // a factor is zero
        };
    Ok(Series { coeffs, exact })
}

/// `f(g)`, truncated at the smaller window. Horner accumulation: one series
/// multiplication by `g` per coefficient of `f`.
pub fn compose<R: Ring>(f: &Series<R>, g: &Series<R>) -> Result<Series<R>, SeriesError> {
    f.check_domains(g)?;
    if !g.coeffs[0].is_zero() {
        return Err(SeriesError::NonzeroConstantInner);
    }
    let tr = f.trunc().min(g.trunc());
    let zero = f.coeffs[0].zero_like();
    let mut acc = vec![zero.clone(); tr];
    let top = f.trunc().min(tr);
    for i in (0..top).rev() {
        // acc = acc * g + f_i
        let mut next = vec![zero.clone(); tr];
        R::mul_block(&mut next, &acc, &g.coeffs[..tr.min(g.coeffs.len())]);
        next[0] = next[0].add(&f.coeffs[i]);
        acc = next;
    }
    let exact = f.exact
        && g.exact
        && match (f.stored_degree(), g.stored_degree()) {
            (Some(df), Some(dg)) => df * dg < tr,
            _ => true,
        };
    Ok(Series { coeffs: acc, exact })
}

/// m-fold self-composition of a series with zero constant term;
/// `m = 0` is the identity.
pub fn iterate<R: Ring>(g: &Series<R>, m: u64) -> Result<Series<R>, SeriesError> {
    if !g.coeffs[0].is_zero() {
        return Err(SeriesError::NonzeroConstantInner);
    }
    let mut acc = Series::identity_like(&g.coeffs[0], g.trunc());
    for _ in 0..m {
        acc = compose(&acc, g)?;
    }
    Ok(acc)
}

/// Order of the series: index of the first provably nonzero coefficient.
pub fn s_ord<R: Ring>(f: &Series<R>) -> CensoredNat {
    for (i, c) in f.coeffs.iter().enumerate() {
        if !c.is_zero() {
            return CensoredNat::Exact(i as u64);
        }
    }
    CensoredNat::AtLeast(f.trunc() as u64)
}

/// Drop the first `k` coefficients (division by `z^k`); the dropped
/// coefficients must be provably zero.
pub fn shift_down<R: Ring>(f: &Series<R>, k: usize) -> Result<Series<R>, SeriesError> {
    if k >= f.trunc() || f.coeffs[..k].iter().any(|c| !c.is_zero()) {
        return Err(SeriesError::NotInvertible);
    }
    Ok(Series {
        coeffs: f.coeffs[k..].to_vec(),
        exact: f.exact,
    })
}

impl Series<FFElem> {
    /// Reciprocal `1/f` for a unit (`c_0 != 0`), to the same truncation.
    pub fn recip(&self) -> Result<Series<FFElem>, SeriesError> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let inv0 = c0.inv().map_err(|_| SeriesError::NotInvertible)?;
        let tr = self.trunc();
        let mut r = vec![c0.zero_like(); tr];
        r[0] = inv0.clone();
        for j in 1..tr {
            let mut s = c0.zero_like();
            for i in 1..=j {
                if !self.coeffs[i].is_zero() && !r[j - i].is_zero() {
                    s = s.add(&self.coeffs[i].mul(&r[j - i]));
                }
            }
            r[j] = inv0.mul(&s).neg();
        }
        Ok(Series {
            coeffs: r,
            exact: false,
        })
    }
}

/// Compositional inverse of `h` (with `h(0) = 0`, `h'(0) != 0`): the series
/// `k` with `k(h(z)) = h(k(z)) = z` to the shared truncation. Triangular
/// solve of `sum_i k_i h(z)^i = z` against cached powers of `h`; the pivot
/// at step `j` is the leading coefficient of `h^j`, which is `c_1^j != 0`.
pub fn comp_inverse(h: &Series<FFElem>) -> Result<Series<FFElem>, SeriesError> {
    if !h.coeffs[0].is_zero() {
        return Err(SeriesError::GermShape("constant term must vanish"));
    }
    if h.trunc() < 2 || h.coeffs[1].is_zero() {
        return Err(SeriesError::NotInvertible);
    }
    let tr = h.trunc();
    let zero = h.coeffs[0].zero_like();
    let mut pows: Vec<Series<FFElem>> = Vec::with_capacity(tr);
    pows.push(h.clone());
    for _ in 2..tr {
        let next = s_mul(pows.last().expect("nonempty"), h)?;
        pows.push(next);
    }
    let mut inv = vec![zero.clone(); tr];
    for j in 1..tr {
        let mut s = if j == 1 { zero.one_like() } else { zero.clone() };
        for i in 1..j {
            if !inv[i].is_zero() {
                s = s.sub(&inv[i].mul(&pows[i - 1].coeffs[j]));
            }
        }
        let pivot = pows[j - 1].coeffs[j].clone();
        inv[j] = s.mul(&pivot.inv().map_err(|_| SeriesError::NotInvertible)?);
    }
    Ok(Series {
        coeffs: inv,
        exact: false,
    })
}

/// A germ: series over a finite field with `g(0) = 0` and `g'(0) != 0`.
/// Carries the multiplier and its multiplicative order.
#[derive(Debug, Clone)]
pub struct Germ {
    s: Series<FFElem>,
    gamma: FFElem,
    q: u64,
}

impl Germ {
    pub fn new(s: Series<FFElem>) -> Result<Germ, SeriesError> {
        if s.trunc() < 2 {
            return Err(SeriesError::GermShape("need at least two coefficients"));
        }
        if !s.coeffs[0].is_zero() {
            return Err(SeriesError::GermShape("constant term must vanish"));
        }
        let gamma = s.coeffs[1].clone();
        if gamma.is_zero() {
            return Err(SeriesError::GermShape("linear coefficient must be nonzero"));
        }
        let q = mult_order(&gamma).expect("gamma nonzero");
        Ok(Germ { s, gamma, q })
    }

    pub fn series(&self) -> &Series<FFElem> {
        &self.s
    }

    pub fn gamma(&self) -> &FFElem {
        &self.gamma
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.gamma.spec().p()
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        self.gamma.spec()
    }

    /// The germ's series at the requested window; exact polynomials extend
    /// freely, truncated data errors when asked to grow.
    pub fn series_at(&self, trunc: usize) -> Result<Series<FFElem>, SeriesError> {
        self.s.with_trunc(trunc.max(2))
    }

    /// True when the germ is exactly the linear polynomial `gamma * z`.
    pub fn is_exact_linear(&self) -> bool {
        self.s.is_exact() && self.s.stored_degree() == Some(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::ff_make;

    fn series_from(f: &Arc<FieldSpec>, vals: &[i64], exact: bool) -> Series<FFElem> {
        Series::from_coeffs(vals.iter().map(|&v| f.from_int(v)).collect(), exact)
    }

    #[test]
    fn mul_matches_hand_convolution() {
        // (1+z)(1+z+z^2) = 1+2z+2z^2+z^3 over F_7
        let f7 = ff_make(7, 1, None).unwrap();
        let a = series_from(&f7, &[1, 1, 0, 0], true);
        let b = series_from(&f7, &[1, 1, 1, 0], true);
        let prod = s_mul(&a, &b).unwrap();
        let want = series_from(&f7, &[1, 2, 2, 1], false);
        assert_eq!(prod.coeffs(), want.coeffs());
    }

    #[test]
    fn compose_identity_is_right_unit() {
        let f7 = ff_make(7, 1, None).unwrap();
        let f = series_from(&f7, &[0, 3, 1, 5, 2], false);
        let id = Series::identity_like(&f7.zero(), 5);
        assert_eq!(compose(&f, &id).unwrap().coeffs(), f.coeffs());
    }

    #[test]
    fn compose_square_example() {
        // z^2 composed with z + z^2 = z^2 + 2z^3 + z^4
        let f7 = ff_make(7, 1, None).unwrap();
        let sq = series_from(&f7, &[0, 0, 1, 0, 0], true);
        let g = series_from(&f7, &[0, 1, 1, 0, 0], true);
        let c = compose(&sq, &g).unwrap();
        assert_eq!(c.coeffs(), series_from(&f7, &[0, 0, 1, 2, 1], false).coeffs());
    }

    #[test]
    fn compose_f11_frozen() {
        // (-z+z^2) o (-z+z^2) = z + 9z^3 + z^4 over F_11
        let f11 = ff_make(11, 1, None).unwrap();
        let g = series_from(&f11, &[0, -1, 1, 0, 0], true);
        let c = compose(&g, &g).unwrap();
        assert_eq!(c.coeffs(), series_from(&f11, &[0, 1, 0, 9, 1], false).coeffs());
        let it = iterate(&g, 2).unwrap();
        assert_eq!(it.coeffs(), c.coeffs());
    }

    #[test]
    fn rejects_nonzero_inner_constant() {
        let f7 = ff_make(7, 1, None).unwrap();
        let f = series_from(&f7, &[0, 1], true);
        let g = series_from(&f7, &[1, 1], true);
        assert_eq!(compose(&f, &g).unwrap_err(), SeriesError::NonzeroConstantInner);
    }

    #[test]
    fn ord_examples() {
        let f7 = ff_make(7, 1, None).unwrap();
        let f = series_from(&f7, &[0, 0, 0, 1, 0, 1], false);
        assert_eq!(s_ord(&f), CensoredNat::Exact(3));
        let z = Series::zero_like(&f7.zero(), 10);
        assert_eq!(s_ord(&z), CensoredNat::AtLeast(10));
    }

    #[test]
    fn comp_inverse_linear() {
        let f7 = ff_make(7, 1, None).unwrap();
        let h = series_from(&f7, &[0, 2], true).with_trunc(4).unwrap();
        let k = comp_inverse(&h).unwrap();
        assert_eq!(k.coeff(1), Some(&f7.from_int(4)));
    }

    #[test]
    fn comp_inverse_f3_frozen() {
        // inverse of z+z^2 over F_3 at trunc 5 is z+2z^2+2z^3+z^4
        let f3 = ff_make(3, 1, None).unwrap();
        let h = series_from(&f3, &[0, 1, 1, 0, 0], true);
        let k = comp_inverse(&h).unwrap();
        assert_eq!(k.coeffs(), series_from(&f3, &[0, 1, 2, 2, 1], false).coeffs());
        let both = compose(&h, &k).unwrap();
        assert_eq!(
            both.coeffs(),
            Series::identity_like(&f3.zero(), 5).coeffs()
        );
        let other = compose(&k, &h).unwrap();
        assert_eq!(
            other.coeffs(),
            Series::identity_like(&f3.zero(), 5).coeffs()
        );
    }

    #[test]
    fn recip_of_unit() {
        let f5 = ff_make(5, 1, None).unwrap();
        let u = series_from(&f5, &[1, 1, 0, 0, 0, 0], true);
        let r = u.recip().unwrap();
        let prod = s_mul(&u, &r).unwrap();
        let mut want = vec![f5.from_int(1)];
        want.resize(6, f5.zero());
        assert_eq!(prod.coeffs(), &want[..]);
    }

    #[test]
    fn germ_shape_checks() {
        let f7 = ff_make(7, 1, None).unwrap();
        assert!(Germ::new(series_from(&f7, &[1, 1], true)).is_err());
        assert!(Germ::new(series_from(&f7, &[0, 0, 1], true)).is_err());
        let g = Germ::new(series_from(&f7, &[0, 2, 1], true)).unwrap();
        assert_eq!(g.q(), 3);
        assert!(!g.is_exact_linear());
        let lin = Germ::new(series_from(&f7, &[0, 4], true)).unwrap();
        assert!(lin.is_exact_linear());
    }

    #[test]
    fn root_of_unity_rotation_iterates_to_identity() {
        let f7 = ff_make(7, 1, None).unwrap();
        let g = series_from(&f7, &[0, 2, 0, 0], true);
        let it = iterate(&g, 3).unwrap();
        assert_eq!(it.coeffs(), Series::identity_like(&f7.zero(), 4).coeffs());
    }
}
