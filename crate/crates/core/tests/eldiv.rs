use a2zeta::eldiv::{antisym_profile, profile_via_minors};
use a2zeta::lattice::{make_sl3, make_su3};
use a2zeta::modring::{ModMatrix, ResidueRing};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_antisym(rng: &mut ChaCha8Rng, ring: ResidueRing, d: usize) -> ModMatrix {
    let mut m = ModMatrix::zero(ring, d);
    for i in 0..d {
        for j in i + 1..d {
            // bias towards non-units so that deeper profiles occur
            let v = rng.gen_range(0..ring.modulus()) * ring.p().pow(rng.gen_range(0..ring.n()));
            let v = v % ring.modulus();
            m.set(i, j, v);
            m.set(j, i, ring.neg(v));
        }
    }
    m
}

/// `L D U` with unit diagonal `D`, hence invertible.
fn random_invertible(rng: &mut ChaCha8Rng, ring: ResidueRing, d: usize) -> ModMatrix {
    let mut l = ModMatrix::zero(ring, d);
    let mut u = ModMatrix::zero(ring, d);
    let mut diag = ModMatrix::zero(ring, d);
    for i in 0..d {
        l.set(i, i, 1);
        u.set(i, i, 1);
        let unit = loop {
            let x = rng.gen_range(1..ring.modulus());
            if x % ring.p() != 0 {
                break x;
            }
        };
        diag.set(i, i, unit);
        for j in 0..i {
            l.set(i, j, rng.gen_range(0..ring.modulus()));
            u.set(j, i, rng.gen_range(0..ring.modulus()));
        }
    }
    l.mul(&diag).mul(&u)
}

#[test]
fn profile_is_congruence_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (p, n) in [(2, 3), (5, 2)] {
        let ring = ResidueRing::new(p, n).unwrap();
        for _ in 0..1000 {
            let m = random_antisym(&mut rng, ring, 8);
            let s = random_invertible(&mut rng, ring, 8);
            assert_eq!(antisym_profile(&m.congruent(&s)).unwrap(), antisym_profile(&m).unwrap());
        }
    }
}

#[test]
fn profile_matches_minor_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (p, n, d) in [(2, 3, 6), (5, 2, 6), (3, 2, 8), (2, 2, 8)] {
        let ring = ResidueRing::new(p, n).unwrap();
        for _ in 0..300 {
            let m = random_antisym(&mut rng, ring, d);
            let s = random_invertible(&mut rng, ring, d);
            let m = m.congruent(&s);
            assert_eq!(antisym_profile(&m).unwrap(), profile_via_minors(&m).unwrap());
        }
    }
}

#[test]
fn last_entry_is_full_for_a2_lattices() {
    for l in [make_sl3(), make_su3(2).unwrap()] {
        let r = l.commutator_matrix();
        for n in 1..=2u32 {
            let ring = ResidueRing::new(2, n).unwrap();
            let modulus = ring.modulus();
            let mut y = vec![0u64; 8];
            for idx in 0..modulus.pow(8) {
                let mut k = idx;
                for c in y.iter_mut() {
                    *c = k % modulus;
                    k /= modulus;
                }
                if y.iter().all(|&c| c % 2 == 0) {
                    continue;
                }
                let prof = antisym_profile(&r.evaluate_mod(&y, &ring).unwrap()).unwrap();
                assert_eq!(*prof.a.last().unwrap(), n, "{} y={y:?}", l.name());
            }
        }
    }
}
