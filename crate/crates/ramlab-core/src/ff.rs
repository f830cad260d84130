//! Finite fields `F_{p^k}` with an explicit modulus.
//!
//! Elements are coordinate vectors in the power basis of the generator `x`,
//! i.e. residues of polynomials modulo an irreducible monic modulus of
//! degree `k`. Fields here are desk scale (`p^k < 2^31`), so arithmetic is
//! plain machine-word modular work and `p^k - 1` factors by trial division.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    NotPrime(u64),
    ReducibleModulus,
    NoDefaultModulus { p: u64, k: usize },
    /// p^k does not fit in a machine word.
    FieldTooLarge { p: u64, k: usize },
    /// Malformed modulus input: wrong degree or non-monic.
    BadModulus,
    ZeroElement,
    FieldMismatch,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::NotPrime(p) => write!(f, "{} is not prime", p),
            FieldError::ReducibleModulus => write!(f, "modulus is reducible"),
            FieldError::NoDefaultModulus { p, k } => write!(
                f,
                "no built-in modulus for p={} k={}; supply one explicitly",
                p, k
            ),
            FieldError::FieldTooLarge { p, k } => {
                write!(f, "p^k overflows a machine word for p={} k={}", p, k)
            }
            FieldError::BadModulus => write!(f, "modulus must be monic of degree k"),
            FieldError::ZeroElement => write!(f, "zero element has no multiplicative order"),
            FieldError::FieldMismatch => write!(f, "operands belong to different fields"),
        }
    }
}

/// A validated description of `F_{p^k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: u64,
    k: usize,
    /// Monic, degree `k`, coefficients in `[0, p)`, low degree first.
    modulus: Vec<u64>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// Polynomials over the prime field as raw coefficient vectors, low degree
// first, used only for modulus validation and reduction tables.
mod pf {
    use alloc::vec;
    use alloc::vec::Vec;

    pub fn trim(a: &mut Vec<u64>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        debug_assert!(m.last() == Some(&1), "modulus must be monic");
        let mut r: Vec<u64> = a.to_vec();
        trim(&mut r);
        while r.len() >= m.len() {
            let lead = r[r.len() - 1];
            let shift = r.len() - m.len();
            if lead != 0 {
                for (i, &mc) in m.iter().enumerate() {
                    let idx = shift + i;
                    r[idx] = (r[idx] + p - lead * mc % p) % p;
                }
            }
            r.pop();
            trim(&mut r);
        }
        r
    }

    pub fn mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &ac) in a.iter().enumerate() {
            if ac == 0 {
                continue;
            }
            for (j, &bc) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ac * bc) % p;
            }
        }
        rem(&prod, m, p)
    }

    pub fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &b, m, p);
            }
            b = mulmod(&b, &b, m, p);
            e >>= 1;
        }
        acc
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            // make b monic so rem applies
            let inv = super::inv_mod_p(b[b.len() - 1], p);
            let bm: Vec<u64> = b.iter().map(|&c| c * inv % p).collect();
            let r = rem(&a, &bm, p);
            a = b;
            b = r;
        }
        a
    }
}

fn inv_mod_p(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a nonzero mod p.
    debug_assert!(a % p != 0);
    let mut acc = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Irreducibility of a monic degree-k polynomial over `F_p`: the Frobenius
/// test. `f` is irreducible iff `x^{p^k} = x (mod f)` and for every prime
/// `r | k` the polynomial `x^{p^{k/r}} - x` is coprime to `f` (no root in
/// any proper subfield `F_{p^j}`, `j | k`).
fn modulus_is_irreducible(modulus: &[u64], p: u64) -> bool {
    let k = modulus.len() - 1;
    if k == 1 {
        return true;
    }
    if modulus[0] == 0 {
        return false; // divisible by x
    }
    // frob[j] = x^{p^j} mod f, built by repeated p-th powers.
    let x = vec![0u64, 1];
    let mut frob = pf::rem(&x, modulus, p);
    let mut frob_tower: Vec<Vec<u64>> = vec![pf::rem(&x, modulus, p)]; // x^{p^0}
    for _ in 0..k {
        frob = pf::powmod(&frob, p, modulus, p);
        frob_tower.push(frob.clone());
    }
    // x^{p^k} == x mod f
    let mut top_minus_x = frob_tower[k].clone();
    sub_x(&mut top_minus_x, p);
    pf::trim(&mut top_minus_x);
    if !top_minus_x.is_empty() {
        return false;
    }
    // coprimality at every maximal proper subfield
    let mut r = 2usize;
    let mut kk = k;
    while kk > 1 {
        if kk % r == 0 {
            let j = k / r;
            let mut d = frob_tower[j].clone();
            sub_x(&mut d, p);
            pf::trim(&mut d);
            let g = pf::gcd(modulus, &d, p);
            if g.len() != 1 {
                return false;
            }
            while kk % r == 0 {
                kk /= r;
            }
        }
        r += 1;
    }
    true
}

fn sub_x(a: &mut Vec<u64>, p: u64) {
    if a.len() < 2 {
        a.resize(2, 0);
    }
    a[1] = (a[1] + p - 1) % p;
}

/// The built-in modulus for small fields: the first monic irreducible of
/// degree `k` in the coefficient order `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`.
/// Deterministic, and self-verified by the same test `ff_make` applies.
/// Covers `k <= 4`, `p <= 13`; for `k = 1` the modulus is `x`.
pub fn default_modulus(p: u64, k: usize) -> Option<Vec<u64>> {
    if k == 1 {
        return Some(vec![0, 1]);
    }
    if k > 4 || p > 13 {
        return None;
    }
    searched_modulus(p, k)
}

/// First monic irreducible of degree `k` over `F_p` in deterministic order.
/// Exists for every `p`, `k >= 1`; the search space is `p^k` candidates.
pub fn searched_modulus(p: u64, k: usize) -> Option<Vec<u64>> {
    let mut total: u64 = 1;
    for _ in 0..k {
        total = total.checked_mul(p)?;
    }
    for v in 0..total {
        let mut cand = Vec::with_capacity(k + 1);
        let mut rest = v;
        for _ in 0..k {
            cand.push(rest % p);
            rest /= p;
        }
        cand.push(1);
        if modulus_is_irreducible(&cand, p) {
            return Some(cand);
        }
    }
    None
}

/// Validate and build a field description.
pub fn ff_make(p: u64, k: usize, modulus: Option<&[i64]>) -> Result<Arc<FieldSpec>, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if k == 0 {
        return Err(FieldError::BadModulus);
    }
    let mut card = 1u64;
    for _ in 0..k {
        card = match card.checked_mul(p) {
            Some(c) => c,
            None => return Err(FieldError::FieldTooLarge { p, k }),
        };
    }
    let modulus = match modulus {
        Some(m) => {
            if m.len() != k + 1 {
                return Err(FieldError::BadModulus);
            }
            let reduced: Vec<u64> = m.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
            if reduced[k] != 1 {
                return Err(FieldError::BadModulus);
            }
            if !modulus_is_irreducible(&reduced, p) {
                return Err(FieldError::ReducibleModulus);
            }
            reduced
        }
        None => default_modulus(p, k).ok_or(FieldError::NoDefaultModulus { p, k })?,
    };
    Ok(Arc::new(FieldSpec { p, k, modulus }))
}

impl FieldSpec {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn card(&self) -> u64 {
        let mut c = 1u64;
        for _ in 0..self.k {
            c *= self.p;
        }
        c
    }

    pub fn zero(self: &Arc<Self>) -> FFElem {
        FFElem {
            spec: Arc::clone(self),
            c: vec![0; self.k],
        }
    }

    pub fn one(self: &Arc<Self>) -> FFElem {
        self.from_int(1)
    }

    pub fn from_int(self: &Arc<Self>, v: i64) -> FFElem {
        let mut c = vec![0; self.k];
        c[0] = v.rem_euclid(self.p as i64) as u64;
        FFElem {
            spec: Arc::clone(self),
            c,
        }
    }

    /// The power-basis generator `x`. Only meaningful for `k >= 2`.
    pub fn gen_x(self: &Arc<Self>) -> FFElem {
        let mut c = vec![0; self.k];
        if self.k >= 2 {
            c[1] = 1;
        }
        FFElem {
            spec: Arc::clone(self),
            c,
        }
    }

    /// Element from power-basis coordinates, reduced mod p; shorter input is
    /// zero padded, longer input is reduced by the modulus.
    pub fn from_coeffs(self: &Arc<Self>, coeffs: &[i64]) -> FFElem {
        let raw: Vec<u64> = coeffs
            .iter()
            .map(|&c| c.rem_euclid(self.p as i64) as u64)
            .collect();
        let mut c = pf::rem(&raw, &self.modulus, self.p);
        c.resize(self.k, 0);
        FFElem {
            spec: Arc::clone(self),
            c,
        }
    }

    /// All field elements in a deterministic order (index order of the
    /// power basis coordinates). Desk-scale sweeps only.
    pub fn elements(self: &Arc<Self>) -> impl Iterator<Item = FFElem> + '_ {
        let spec = Arc::clone(self);
        (0..self.card()).map(move |v| {
            let mut c = vec![0u64; spec.k];
            let mut rest = v;
            for slot in c.iter_mut() {
                *slot = rest % spec.p;
                rest /= spec.p;
            }
            FFElem {
                spec: Arc::clone(&spec),
                c,
            }
        })
    }
}

/// An element of `F_{p^k}`: coordinates in the power basis of `x`.
#[derive(Debug, Clone)]
pub struct FFElem {
    spec: Arc<FieldSpec>,
    c: Vec<u64>,
}

impl PartialEq for FFElem {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other) && self.c == other.c
    }
}

impl Eq for FFElem {}

impl FFElem {
    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    /// Coordinates over the prime field in the power basis of x.
    pub fn coords(&self) -> &[u64] {
        &self.c
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn same_field(&self, other: &FFElem) -> bool {
        Arc::ptr_eq(&self.spec, &other.spec) || *self.spec == *other.spec
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&v| v == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&v| v == 0)
    }

    /// Residue value for prime fields (`k = 1`).
    pub fn as_int(&self) -> Option<u64> {
        if self.spec.k == 1 {
            Some(self.c[0])
        } else {
            None
        }
    }

    pub fn add(&self, rhs: &FFElem) -> FFElem {
        debug_assert!(self.same_field(rhs));
        let p = self.spec.p;
        let c = self
            .c
            .iter()
            .zip(&rhs.c)
            .map(|(&a, &b)| (a + b) % p)
            .collect();
        FFElem {
            spec: Arc::clone(&self.spec),
            c,
        }
    }

    pub fn sub(&self, rhs: &FFElem) -> FFElem {
        debug_assert!(self.same_field(rhs));
        let p = self.spec.p;
        let c = self
            .c
            .iter()
            .zip(&rhs.c)
            .map(|(&a, &b)| (a + p - b) % p)
            .collect();
        FFElem {
            spec: Arc::clone(&self.spec),
            c,
        }
    }

    pub fn neg(&self) -> FFElem {
        let p = self.spec.p;
        let c = self.c.iter().map(|&a| (p - a) % p).collect();
        FFElem {
            spec: Arc::clone(&self.spec),
            c,
        }
    }

    pub fn mul(&self, rhs: &FFElem) -> FFElem {
        debug_assert!(self.same_field(rhs));
        let p = self.spec.p;
        if self.spec.k == 1 {
            return FFElem {
                spec: Arc::clone(&self.spec),
                c: vec![self.c[0] * rhs.c[0] % p],
            };
        }
        let mut r = pf::mulmod(&self.c, &rhs.c, &self.spec.modulus, p);
        r.resize(self.spec.k, 0);
        FFElem {
            spec: Arc::clone(&self.spec),
            c: r,
        }
    }

    pub fn pow(&self, mut e: u64) -> FFElem {
        let mut acc = self.spec.one();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self) -> Result<FFElem, FieldError> {
        if self.is_zero() {
            return Err(FieldError::ZeroElement);
        }
        Ok(self.pow(self.spec.card() - 2))
    }

    pub fn div(&self, rhs: &FFElem) -> Result<FFElem, FieldError> {
        Ok(self.mul(&rhs.inv()?))
    }
}

impl fmt::Display for FFElem {
    /// Prime fields print the residue; extensions print `poly:` form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.spec.k == 1 {
            return write!(f, "{}", self.c[0]);
        }
        write!(f, "poly:")?;
        let mut first = true;
        for (i, &v) in self.c.iter().enumerate() {
            if v == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", v)?,
                1 if v == 1 => write!(f, "x")?,
                1 => write!(f, "{}*x", v)?,
                _ if v == 1 => write!(f, "x^{}", i)?,
                _ => write!(f, "{}*x^{}", v, i)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Least `q >= 1` with `x^q = 1`: start from the group order `p^k - 1` and
/// descend through its prime factors.
pub fn mult_order(x: &FFElem) -> Result<u64, FieldError> {
    if x.is_zero() {
        return Err(FieldError::ZeroElement);
    }
    let group = x.spec.card() - 1;
    let mut order = group;
    for f in prime_factors(group) {
        while order % f == 0 && x.pow(order / f).is_one() {
            order /= f;
        }
    }
    debug_assert!(x.pow(order).is_one());
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_check() {
        assert!(is_prime(2));
        assert!(is_prime(13));
        assert!(!is_prime(1));
        assert!(!is_prime(15));
    }

    #[test]
    fn default_moduli_match_classics() {
        // x^2+1 over F_3, x^2+x+1 over F_2, x^4+x+1 over F_2
        assert_eq!(default_modulus(3, 2).unwrap(), vec![1, 0, 1]);
        assert_eq!(default_modulus(2, 2).unwrap(), vec![1, 1, 1]);
        assert_eq!(default_modulus(2, 4).unwrap(), vec![1, 1, 0, 0, 1]);
    }

    #[test]
    fn ff_make_rejects_bad_input() {
        assert_eq!(ff_make(6, 1, None).unwrap_err(), FieldError::NotPrime(6));
        // x^2 + 2 = (x+1)(x+2) mod 3
        assert_eq!(
            ff_make(3, 2, Some(&[2, 0, 1])).unwrap_err(),
            FieldError::ReducibleModulus
        );
        assert_eq!(
            ff_make(17, 2, None).unwrap_err(),
            FieldError::NoDefaultModulus { p: 17, k: 2 }
        );
        assert_eq!(
            ff_make(5, 2, Some(&[1, 1])).unwrap_err(),
            FieldError::BadModulus
        );
    }

    #[test]
    fn orders_in_f7() {
        let f7 = ff_make(7, 1, None).unwrap();
        assert_eq!(mult_order(&f7.from_int(1)).unwrap(), 1);
        assert_eq!(mult_order(&f7.from_int(2)).unwrap(), 3);
        assert_eq!(mult_order(&f7.from_int(4)).unwrap(), 3);
        assert_eq!(mult_order(&f7.from_int(3)).unwrap(), 6);
        assert!(mult_order(&f7.zero()).is_err());
    }

    #[test]
    fn order_of_minus_one() {
        let f11 = ff_make(11, 1, None).unwrap();
        assert_eq!(mult_order(&f11.from_int(-1)).unwrap(), 2);
    }

    #[test]
    fn f16_inverse_and_order() {
        let f16 = ff_make(2, 4, None).unwrap();
        let x = f16.gen_x();
        assert_eq!(mult_order(&x).unwrap(), 15);
        let x3 = x.pow(3);
        assert_eq!(mult_order(&x3).unwrap(), 5);
        let inv = x3.inv().unwrap();
        assert!(x3.mul(&inv).is_one());
    }

    #[test]
    fn from_coeffs_reduces_by_modulus() {
        let f4 = ff_make(2, 2, None).unwrap();
        // x^2 = x + 1 under x^2+x+1
        let e = f4.from_coeffs(&[0, 0, 1]);
        assert_eq!(e.coeffs(), &[1, 1]);
    }
}
