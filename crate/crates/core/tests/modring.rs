use a2zeta::modring::{FqField, ResidueRing, Valuation};
use proptest::prelude::*;

fn small_fields() -> Vec<FqField> {
    [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (3, 2)]
        .into_iter()
        .map(|(p, f)| FqField::new(p, f).unwrap())
        .collect()
}

#[test]
fn field_axioms_exhaustive() {
    for k in small_fields() {
        let els: Vec<_> = k.elements().collect();
        assert_eq!(els.len() as u64, k.q());
        for &a in &els {
            if !k.is_zero(a) {
                let inv = k.inv(a).unwrap();
                assert_eq!(k.mul(a, inv), k.one());
            }
            assert_eq!(k.add(a, k.neg(a)), k.zero());
            for &b in &els {
                assert_eq!(k.mul(a, b), k.mul(b, a));
                for &c in &els {
                    assert_eq!(k.mul(k.mul(a, b), c), k.mul(a, k.mul(b, c)));
                    assert_eq!(k.add(k.add(a, b), c), k.add(a, k.add(b, c)));
                    assert_eq!(k.mul(a, k.add(b, c)), k.add(k.mul(a, b), k.mul(a, c)));
                }
            }
        }
        assert!(k.inv(k.zero()).is_none());
    }
}

#[test]
fn frobenius_is_additive_and_multiplicative() {
    for q in 2..=49u64 {
        let Some((p, f)) = prime_power(q) else { continue };
        if f > 2 {
            continue;
        }
        let k = FqField::new(p, f).unwrap();
        let els: Vec<_> = k.elements().collect();
        for &a in &els {
            for &b in &els {
                assert_eq!(k.frobenius(k.add(a, b)), k.add(k.frobenius(a), k.frobenius(b)));
                assert_eq!(k.frobenius(k.mul(a, b)), k.mul(k.frobenius(a), k.frobenius(b)));
            }
        }
    }
}

fn prime_power(q: u64) -> Option<(u64, u32)> {
    let p = (2..=q).find(|d| q % d == 0)?;
    let (mut r, mut f) = (q, 0);
    while r % p == 0 {
        r /= p;
        f += 1;
    }
    (r == 1).then_some((p, f))
}

proptest! {
    #[test]
    fn valuation_rules(p in prop::sample::select(vec![2u64, 3, 5, 7]), n in 1u32..5, x in any::<u64>(), y in any::<u64>()) {
        let ring = ResidueRing::new(p, n).unwrap();
        let (x, y) = (x % ring.modulus(), y % ring.modulus());
        let (vx, vy) = (ring.val(x), ring.val(y));
        prop_assert_eq!(ring.val(ring.mul(x, y)), vx.mul(vy, n));
        prop_assert!(ring.val(ring.add(x, y)) >= vx.min(vy));
        prop_assert_eq!(ring.val(0), Valuation::AtLeast(n));
    }
}
