//! Arithmetic in GF(p^m) for prime powers up to 2^16.
//!
//! Elements are identified by the base-p reading of their polynomial
//! coefficient vector: the element `c_0 + c_1 x + ... + c_{m-1} x^{m-1}` has
//! index `c_0 + c_1 p + ... + c_{m-1} p^{m-1}`. Index 0 is zero and index 1 is
//! one. Extension fields use the lexicographically-least monic irreducible
//! polynomial of degree m as modulus, so the enumeration is reproducible.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("no irreducible modulus available for GF({p}^{m})")]
    NoModulus { p: u32, m: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("element index {index} does not belong to GF({order})")]
    FieldMismatch { index: u32, order: u32 },
}

/// Characteristic, degree and modulus of a field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    /// Low-to-high coefficients of the monic modulus, leading 1 omitted.
    /// Empty for prime fields.
    pub modulus: Vec<u32>,
}

impl FieldSpec {
    pub fn order(&self) -> u32 {
        self.p.pow(self.m)
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// A finite field with precomputed log/antilog tables.
#[derive(Debug, Clone)]
pub struct Field {
    spec: FieldSpec,
    q: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

/// Returns `(p, m)` with `q = p^m` and `p` prime, or `None`.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q {
        if q.is_multiple_of(p) {
            break;
        }
        p += 1;
    }
    if p * p > q {
        // q itself is prime
        return u32::try_from(q).ok().map(|q| (q, 1));
    }
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    if rest == 1 {
        Some((p as u32, m))
    } else {
        None
    }
}

pub fn is_prime_power(q: u64) -> bool {
    prime_power(q).is_some()
}

// Polynomials over GF(p), coefficients low to high, no trailing zeros.
fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = poly_trim(a.to_vec());
    let db = b.len() - 1;
    let lead_inv = mod_inv(b[db], p);
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let coef = r[r.len() - 1] * lead_inv % p;
        for (i, &bc) in b.iter().enumerate() {
            let idx = shift + i;
            r[idx] = (r[idx] + p - coef * bc % p) % p;
        }
        r = poly_trim(r);
    }
    r
}

fn mod_inv(a: u32, p: u32) -> u32 {
    mod_pow(a, p - 2, p)
}

fn mod_pow(mut base: u32, mut e: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut b = base as u64 % p as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    base = acc as u32;
    base
}

fn digits(mut index: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = index % p;
        index /= p;
    }
    out
}

fn undigits(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        for low in 0..p.pow(d as u32) {
            let mut g = digits(low, p, d);
            g.push(1);
            if poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically-least monic irreducible of degree `m` over GF(p),
/// returned without its leading coefficient.
fn least_irreducible(p: u32, m: u32) -> Option<Vec<u32>> {
    (0..p.checked_pow(m)?).find_map(|low| {
        let mut f = digits(low, p, m as usize);
        f.push(1);
        is_irreducible(&f, p).then(|| {
            f.pop();
            f
        })
    })
}

fn distinct_prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
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

impl Field {
    /// Builds GF(q).
    pub fn new(q: u64) -> Result<Self, GfError> {
        let (p, m) = prime_power(q).ok_or(GfError::NotPrimePower(q))?;
        if q > MAX_ORDER as u64 {
            return Err(GfError::NoModulus { p, m });
        }
        let modulus = if m == 1 {
            Vec::new()
        } else {
            least_irreducible(p, m).ok_or(GfError::NoModulus { p, m })?
        };
        Ok(Self::from_spec(FieldSpec { p, m, modulus }))
    }

    fn from_spec(spec: FieldSpec) -> Self {
        let q = spec.order();
        let mut field = Field {
            spec,
            q,
            exp: Vec::new(),
            log: Vec::new(),
        };
        if q == 2 {
            field.exp = vec![1];
            field.log = vec![0, 0];
            return field;
        }
        let factors = distinct_prime_factors(q - 1);
        let generator = (2..q)
            .find(|&g| factors.iter().all(|&r| field.slow_pow(g, (q - 1) / r) != 1))
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = Vec::with_capacity(q as usize - 1);
        let mut log = vec![0; q as usize];
        let mut x = 1;
        for i in 0..q - 1 {
            exp.push(x);
            log[x as usize] = i;
            x = field.slow_mul(x, generator);
        }
        field.exp = exp;
        field.log = log;
        field
    }

    fn slow_mul(&self, a: u32, b: u32) -> u32 {
        let p = self.spec.p;
        if self.spec.m == 1 {
            return ((a as u64 * b as u64) % p as u64) as u32;
        }
        let m = self.spec.m as usize;
        let da = digits(a, p, m);
        let db = digits(b, p, m);
        let mut prod = vec![0u32; 2 * m - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        let mut modulus = self.spec.modulus.clone();
        modulus.push(1);
        let r = poly_rem(&prod, &modulus, p);
        undigits(&r, p)
    }

    fn slow_pow(&self, a: u32, mut e: u32) -> u32 {
        let mut acc = 1;
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.slow_mul(acc, b);
            }
            b = self.slow_mul(b, b);
            e >>= 1;
        }
        acc
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.spec.p
    }

    /// Checked conversion from an index.
    pub fn element(&self, index: u32) -> Result<FieldElement, GfError> {
        if index < self.q {
            Ok(FieldElement(index))
        } else {
            Err(GfError::FieldMismatch {
                index,
                order: self.q,
            })
        }
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(FieldElement)
    }

    /// Coefficients (low to high) of the polynomial representing `a`.
    pub fn coefficients(&self, a: FieldElement) -> Vec<u32> {
        digits(a.0, self.spec.p, self.spec.m as usize)
    }

    pub fn from_coefficients(&self, coeffs: &[u32]) -> Result<FieldElement, GfError> {
        let p = self.spec.p;
        if coeffs.len() > self.spec.m as usize || coeffs.iter().any(|&c| c >= p) {
            return Err(GfError::FieldMismatch {
                index: u32::MAX,
                order: self.q,
            });
        }
        Ok(FieldElement(undigits(coeffs, p)))
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(a.0 < self.q && b.0 < self.q);
        let p = self.spec.p;
        if p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        if self.spec.m == 1 {
            return FieldElement((a.0 + b.0) % p);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        let mut place = 1;
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        FieldElement(out)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let p = self.spec.p;
        if p == 2 {
            return a;
        }
        let (mut x, mut out, mut place) = (a.0, 0, 1);
        while x > 0 {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        FieldElement(out)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(a.0 < self.q && b.0 < self.q);
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let s = self.log[a.0 as usize] + self.log[b.0 as usize];
        FieldElement(self.exp[(s % (self.q - 1)) as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, GfError> {
        if a.0 == 0 {
            return Err(GfError::DivisionByZero);
        }
        let l = self.log[a.0 as usize];
        Ok(FieldElement(
            self.exp[((self.q - 1 - l) % (self.q - 1)) as usize],
        ))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return FieldElement::ONE;
        }
        if a.0 == 0 {
            return FieldElement::ZERO;
        }
        let l = self.log[a.0 as usize] as u64 * (e % (self.q as u64 - 1));
        FieldElement(self.exp[(l % (self.q as u64 - 1)) as usize])
    }

    /// Checked operations for elements of unknown provenance.
    pub fn checked_add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.add(self.element(a.0)?, self.element(b.0)?))
    }

    pub fn checked_mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.mul(self.element(a.0)?, self.element(b.0)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let f = Field::new(5).unwrap();
        let e = |i| f.element(i).unwrap();
        assert_eq!(f.add(e(2), e(4)), e(1));
        assert_eq!(f.mul(e(3), e(4)), e(2));
        assert_eq!(f.sub(e(1), e(3)), e(3));
        assert!(f.spec().modulus.is_empty());
    }

    #[test]
    fn not_prime_power() {
        assert_eq!(Field::new(6).unwrap_err(), GfError::NotPrimePower(6));
        assert_eq!(Field::new(1).unwrap_err(), GfError::NotPrimePower(1));
        assert_eq!(Field::new(12).unwrap_err(), GfError::NotPrimePower(12));
    }

    #[test]
    fn gf4_uses_x2_x_1() {
        let f = Field::new(4).unwrap();
        assert_eq!(f.spec().modulus, vec![1, 1]);
        // omega = x has index 2, omega + 1 has index 3
        let w = f.element(2).unwrap();
        assert_eq!(f.mul(w, w), f.element(3).unwrap());
    }

    #[test]
    fn known_least_irreducibles() {
        // x^3 + x + 1, x^4 + x + 1, x^2 + 1 over GF(3)
        assert_eq!(Field::new(8).unwrap().spec().modulus, vec![1, 1, 0]);
        assert_eq!(Field::new(16).unwrap().spec().modulus, vec![1, 1, 0, 0]);
        assert_eq!(Field::new(9).unwrap().spec().modulus, vec![1, 0]);
    }

    #[test]
    fn inverse_and_division_by_zero() {
        let f = Field::new(9).unwrap();
        assert_eq!(f.inv(FieldElement::ZERO), Err(GfError::DivisionByZero));
        for a in f.elements().skip(1) {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
        }
    }

    #[test]
    fn foreign_index_is_rejected() {
        let f = Field::new(4).unwrap();
        assert!(matches!(
            f.checked_add(FieldElement(7), FieldElement(1)),
            Err(GfError::FieldMismatch { index: 7, order: 4 })
        ));
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let f = Field::new(27).unwrap();
        for a in f.elements() {
            let mut acc = FieldElement::ONE;
            for e in 0..30 {
                assert_eq!(f.pow(a, e), acc);
                acc = f.mul(acc, a);
            }
        }
    }

    #[test]
    fn largest_binary_field_builds() {
        let f = Field::new(1 << 16).unwrap();
        let a = f.element(12345).unwrap();
        assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
        assert!(matches!(
            Field::new(1 << 17),
            Err(GfError::NoModulus { .. })
        ));
    }
}
