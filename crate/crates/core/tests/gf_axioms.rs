use frb_core::gf::{prime_power, Field, FieldElement};

fn prime_powers_up_to(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&q| prime_power(q).is_some()).collect()
}

/// Schoolbook product of two coefficient vectors reduced by the field's
/// modulus, computed without the field's log tables.
fn poly_mul_oracle(f: &Field, a: FieldElement, b: FieldElement) -> FieldElement {
    let p = f.characteristic();
    let m = f.spec().m as usize;
    if m == 1 {
        return f.element((a.index() * b.index()) % p).unwrap();
    }
    let (ca, cb) = (f.coefficients(a), f.coefficients(b));
    let mut prod = vec![0u32; 2 * m - 1];
    for i in 0..m {
        for j in 0..m {
            prod[i + j] = (prod[i + j] + ca[i] * cb[j]) % p;
        }
    }
    // x^m = -(low terms of the modulus)
    let modulus = &f.spec().modulus;
    for d in (m..2 * m - 1).rev() {
        let c = std::mem::take(&mut prod[d]);
        for (i, &mc) in modulus.iter().enumerate() {
            let idx = d - m + i;
            prod[idx] = (prod[idx] + p - c * mc % p) % p;
        }
    }
    f.from_coefficients(&prod[..m]).unwrap()
}

#[test]
fn field_axioms_exhaustive_up_to_64() {
    for q in prime_powers_up_to(64) {
        let f = Field::new(q).unwrap();
        let els: Vec<FieldElement> = f.elements().collect();
        assert_eq!(els.len() as u64, q);
        for &a in &els {
            assert_eq!(f.add(a, FieldElement::ZERO), a, "GF({q}) additive identity");
            assert_eq!(
                f.mul(a, FieldElement::ONE),
                a,
                "GF({q}) multiplicative identity"
            );
            assert_eq!(f.add(a, f.neg(a)), FieldElement::ZERO);
            if !a.is_zero() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
            }
            for &b in &els {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(
                    f.mul(a, b),
                    poly_mul_oracle(&f, a, b),
                    "GF({q}) {a:?}*{b:?}"
                );
                assert_eq!(f.sub(f.add(a, b), b), a);
            }
        }
        // triples are cubic; sample a stride for the larger fields
        let stride = if q > 32 { 3 } else { 1 };
        for &a in els.iter().step_by(stride) {
            for &b in els.iter().step_by(stride) {
                for &c in &els {
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }
}

#[test]
fn gf4_table() {
    let f = Field::new(4).unwrap();
    let e = |i| f.element(i).unwrap();
    // 0, 1, w, w+1
    let mul = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];
    for a in 0..4 {
        for b in 0..4 {
            assert_eq!(f.mul(e(a), e(b)), e(mul[a as usize][b as usize]));
            assert_eq!(f.add(e(a), e(b)), e(a ^ b));
        }
    }
}

#[test]
fn enumeration_is_a_bijection() {
    for q in [9u64, 25, 27, 32, 49, 64, 81, 128, 256] {
        let f = Field::new(q).unwrap();
        for a in f.elements() {
            let c = f.coefficients(a);
            assert_eq!(c.len(), f.spec().m as usize);
            assert_eq!(f.from_coefficients(&c).unwrap(), a);
        }
    }
}

#[test]
fn moduli_are_irreducible_and_least() {
    // reducible monics are exactly the products of two lower-degree monics
    for (p, m) in [
        (2u32, 2u32),
        (2, 3),
        (2, 4),
        (2, 5),
        (2, 6),
        (3, 2),
        (3, 3),
        (5, 2),
        (7, 2),
    ] {
        let q = (p as u64).pow(m);
        let f = Field::new(q).unwrap();
        let modulus = f.spec().modulus.clone();
        let reducible = reducible_set(p, m as usize);
        let as_int = |low: &[u32]| {
            low.iter()
                .rev()
                .fold(0u64, |acc, &c| acc * p as u64 + c as u64)
        };
        let chosen = as_int(&modulus);
        assert!(!reducible.contains(&chosen), "GF({q}) modulus reducible");
        for smaller in 0..chosen {
            assert!(
                reducible.contains(&smaller),
                "GF({q}): {smaller} is a smaller irreducible"
            );
        }
    }
}

/// Low-coefficient integers of all reducible monic polynomials of degree m.
fn reducible_set(p: u32, m: usize) -> std::collections::HashSet<u64> {
    fn monics(p: u32, d: usize) -> Vec<Vec<u32>> {
        (0..(p as u64).pow(d as u32))
            .map(|mut x| {
                let mut v: Vec<u32> = (0..d)
                    .map(|_| {
                        let c = (x % p as u64) as u32;
                        x /= p as u64;
                        c
                    })
                    .collect();
                v.push(1);
                v
            })
            .collect()
    }
    let mut out = std::collections::HashSet::new();
    for d in 1..=m / 2 {
        for a in monics(p, d) {
            for b in monics(p, m - d) {
                let mut prod = vec![0u32; m + 1];
                for (i, &x) in a.iter().enumerate() {
                    for (j, &y) in b.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let low = &prod[..m];
                out.insert(
                    low.iter()
                        .rev()
                        .fold(0u64, |acc, &c| acc * p as u64 + c as u64),
                );
            }
        }
    }
    out
}
