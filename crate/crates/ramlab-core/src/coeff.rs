//! The coefficient-ring interface shared by truncated series and
//! polynomials: finite-field elements and valued scalars both implement it.
//!
//! `mul_block` is the one performance-critical hook. Convolutions over a
//! prime field run on raw machine words with a single deferred reduction,
//! which is what keeps the large iterate computations inside their time
//! budgets; every other type just uses the generic element-wise loop.

use alloc::vec;
use alloc::vec::Vec;

use crate::ff::FFElem;

pub trait Ring: Clone + PartialEq {
    fn same_domain(&self, other: &Self) -> bool;
    /// Provably zero. Censored values must answer `false`.
    fn is_zero(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;

    /// Accumulate the convolution `out[i+j] += a[i] * b[j]`, dropping terms
    /// with `i + j >= out.len()`. Callers size `out` to the truncation they
    /// want (series) or to the full product length (polynomials).
    fn mul_block(out: &mut [Self], a: &[Self], b: &[Self]) {
        let n = out.len();
        let nzb: Vec<(usize, &Self)> = b
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .collect();
        for (i, av) in a.iter().enumerate() {
            if i >= n || av.is_zero() {
                continue;
            }
            for &(j, bv) in &nzb {
                if i + j >= n {
                    break;
                }
                out[i + j] = out[i + j].add(&av.mul(bv));
            }
        }
    }
}

impl Ring for FFElem {
    fn same_domain(&self, other: &Self) -> bool {
        self.same_field(other)
    }

    fn is_zero(&self) -> bool {
        FFElem::is_zero(self)
    }

    fn zero_like(&self) -> Self {
        self.spec().zero()
    }

    fn one_like(&self) -> Self {
        self.spec().one()
    }

    fn add(&self, rhs: &Self) -> Self {
        FFElem::add(self, rhs)
    }

    fn sub(&self, rhs: &Self) -> Self {
        FFElem::sub(self, rhs)
    }

    fn neg(&self) -> Self {
        FFElem::neg(self)
    }

    fn mul(&self, rhs: &Self) -> Self {
        FFElem::mul(self, rhs)
    }

    fn mul_block(out: &mut [Self], a: &[Self], b: &[Self]) {
        let spec = match out.first().or_else(|| a.first()).or_else(|| b.first()) {
            Some(e) => e.spec().clone(),
            None => return,
        };
        if spec.k() != 1 {
            generic_mul_block(out, a, b);
            return;
        }
        // Prime field: convolve on u64 words and reduce once. Products are
        // at most (p-1)^2 <= 144 and the accumulator starts below p, so
        // overflow would need ~2^56 terms; far beyond any truncation here.
        let p = spec.p();
        let n = out.len();
        let mut acc: Vec<u64> = out.iter().map(|e| e.coeffs()[0]).collect();
        let av: Vec<u64> = a.iter().map(|e| e.coeffs()[0]).collect();
        let nzb: Vec<(usize, u64)> = b
            .iter()
            .enumerate()
            .map(|(j, e)| (j, e.coeffs()[0]))
            .filter(|&(_, v)| v != 0)
            .collect();
        for (i, &ai) in av.iter().enumerate() {
            if i >= n || ai == 0 {
                continue;
            }
            for &(j, bj) in &nzb {
                if i + j >= n {
                    break;
                }
                acc[i + j] += ai * bj;
            }
        }
        for (slot, &v) in out.iter_mut().zip(acc.iter()) {
            *slot = spec.from_int((v % p) as i64);
        }
    }
}

pub(crate) fn generic_mul_block<R: Ring>(out: &mut [R], a: &[R], b: &[R]) {
    let n = out.len();
    let nzb: Vec<(usize, &R)> = b
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .collect();
    for (i, av) in a.iter().enumerate() {
        if i >= n || av.is_zero() {
            continue;
        }
        for &(j, bv) in &nzb {
            if i + j >= n {
                break;
            }
            out[i + j] = out[i + j].add(&av.mul(bv));
        }
    }
}

/// Full product of two coefficient slices (polynomial multiplication).
pub fn poly_mul<R: Ring>(a: &[R], b: &[R], zero: &R) -> Vec<R> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![zero.clone(); a.len() + b.len() - 1];
    R::mul_block(&mut out, a, b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::ff_make;

    #[test]
    fn prime_field_block_matches_generic() {
        let f7 = ff_make(7, 1, None).unwrap();
        let a: Vec<FFElem> = [1, 0, 3, 6].iter().map(|&v| f7.from_int(v)).collect();
        let b: Vec<FFElem> = [2, 5, 0, 1].iter().map(|&v| f7.from_int(v)).collect();
        let mut fast = vec![f7.zero(); 7];
        FFElem::mul_block(&mut fast, &a, &b);
        let mut slow = vec![f7.zero(); 7];
        generic_mul_block(&mut slow, &a, &b);
        assert_eq!(fast, slow);
    }

    #[test]
    fn extension_field_product() {
        let f4 = ff_make(2, 2, None).unwrap();
        let x = f4.gen_x();
        // (x + x*z) * (1 + z) = x + 0*z + x*z^2  since x + x = 0
        let a = vec![x.clone(), x.clone()];
        let b = vec![f4.one(), f4.one()];
        let prod = poly_mul(&a, &b, &f4.zero());
        assert_eq!(prod[0], x);
        assert!(prod[1].is_zero());
        assert_eq!(prod[2], x);
    }
}
