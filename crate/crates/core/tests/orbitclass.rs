use a2zeta::modring::FqField;
use a2zeta::orbitclass::*;
use a2zeta::ratfun::Variant;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_element(rng: &mut ChaCha8Rng, variant: Variant, k: &FqField, q: u64) -> Mat3 {
    element_at(variant, k, rng.gen_range(0..q.pow(8)))
}

fn random_gl3(rng: &mut ChaCha8Rng, k: &FqField) -> Mat3 {
    loop {
        let mut g = zero_mat(k);
        for row in g.iter_mut() {
            for e in row.iter_mut() {
                *e = k.from_index(rng.gen_range(0..k.q() as usize));
            }
        }
        if mat_inv(k, &g).is_ok() {
            return g;
        }
    }
}

/// Products of Cayley transforms of antihermitian matrices are unitary.
fn random_unitary(rng: &mut ChaCha8Rng, k: &FqField, q: u64) -> Mat3 {
    let mut g = identity(k);
    for _ in 0..3 {
        let y = random_element(rng, Variant::Su3, k, q);
        if let Ok(c) = cayley(k, &y) {
            g = mat_mul(k, &g, &c);
        }
    }
    g
}

#[test]
fn classification_is_conjugation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for variant in [Variant::Sl3, Variant::Su3] {
        let k = algebra_field(variant, 5).unwrap();
        for _ in 0..10_000 {
            let x = random_element(&mut rng, variant, &k, 5);
            let g = match variant {
                Variant::Sl3 => random_gl3(&mut rng, &k),
                Variant::Su3 => random_unitary(&mut rng, &k, 5),
            };
            let y = mat_mul(&k, &mat_mul(&k, &g, &x), &mat_inv(&k, &g).unwrap());
            assert_eq!(classify(variant, &k, &x).unwrap(), classify(variant, &k, &y).unwrap());
        }
    }
}

#[test]
fn cayley_round_trip_and_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let k = algebra_field(Variant::Su3, 5).unwrap();
    assert_eq!(k.q(), 25);
    let mut checked = 0;
    while checked < 1000 {
        let x = random_element(&mut rng, Variant::Su3, &k, 5);
        let Ok(c) = cayley(&k, &x) else { continue };
        assert_eq!(cayley_inv(&k, &c).unwrap(), x);
        assert_eq!(mat_mul(&k, &conj_transpose(&k, &c), &c), identity(&k));
        let g = random_unitary(&mut rng, &k, 5);
        let gi = mat_inv(&k, &g).unwrap();
        let gx = mat_mul(&k, &mat_mul(&k, &g, &x), &gi);
        let gc = mat_mul(&k, &mat_mul(&k, &g, &c), &gi);
        assert_eq!(cayley(&k, &gx).unwrap(), gc);
        checked += 1;
    }
}

#[test]
fn census_matches_tables() {
    for (variant, q) in [(Variant::Sl3, 2), (Variant::Sl3, 5), (Variant::Su3, 5)] {
        let c = census(variant, q, DEFAULT_ORBIT_BUDGET).unwrap();
        for row in table(variant, q) {
            assert_eq!(row.total, row.orbits * row.orbit_size);
            assert_eq!(c.count(row.tag) as u128, row.total, "{variant} q={q} {}", row.tag);
        }
        assert_eq!(c.total() as u128, (q as u128).pow(8));
    }
}

#[test]
fn orbit_size_times_centraliser_is_group_order() {
    let k = algebra_field(Variant::Sl3, 5).unwrap();
    let order = group_order(MatrixGroup::Gl3, &k).unwrap();
    for (tag, x) in representatives(Variant::Sl3, 5).unwrap() {
        let cen = centralizer_order(&k, &x, MatrixGroup::Gl3, DEFAULT_ORBIT_BUDGET).unwrap();
        assert_eq!(table_row(Variant::Sl3, tag, 5).orbit_size * cen, order, "{tag}");
    }
    let k = algebra_field(Variant::Su3, 5).unwrap();
    let order = group_order(MatrixGroup::Gu3, &k).unwrap();
    for (tag, x) in representatives(Variant::Su3, 5).unwrap() {
        if tag == OrbitTag::T0 {
            continue;
        }
        let cen = centralizer_order(&k, &x, MatrixGroup::Gu3, DEFAULT_ORBIT_BUDGET).unwrap();
        assert_eq!(table_row(Variant::Su3, tag, 5).orbit_size * cen, order, "{tag}");
    }
}

#[test]
fn su3_rejects_small_characteristic() {
    let k = FqField::new(3, 2).unwrap();
    assert!(classify(Variant::Su3, &k, &zero_mat(&k)).is_err());
    assert!(algebra_field(Variant::Sl3, 3).is_err());
}
