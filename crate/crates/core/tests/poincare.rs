use a2zeta::lattice::{make_sl3, make_su3};
use a2zeta::poincare::{enumerate_counts, montecarlo_profiles, zeta_coeffs, ProfileCensus, DEFAULT_BUDGET};
use num_traits::Signed;

fn censuses() -> Vec<ProfileCensus> {
    vec![
        enumerate_counts(&make_sl3(), 2, 2, DEFAULT_BUDGET).unwrap(),
        enumerate_counts(&make_su3(2).unwrap(), 2, 2, DEFAULT_BUDGET).unwrap(),
        enumerate_counts(&make_sl3(), 5, 1, DEFAULT_BUDGET).unwrap(),
    ]
}

#[test]
fn level_totals_count_primitive_vectors() {
    for c in censuses() {
        for n in 1..=c.n_max() {
            let q = c.p as u128;
            assert_eq!(c.total(n), q.pow(8 * n) - q.pow(8 * (n - 1)));
        }
    }
}

#[test]
fn coefficients_are_nonnegative_integers() {
    for c in censuses() {
        let m = if c.p == 2 { 2 } else { 1 };
        for (_, r) in zeta_coeffs(&c, m, 2 * c.n_max() + 1).unwrap() {
            assert!(r.is_integer() && !r.is_negative(), "{r}");
        }
    }
}

#[test]
fn projection_recovers_lower_level() {
    for c in censuses().into_iter().filter(|c| c.n_max() >= 2) {
        assert_eq!(&c.project(2, 1).unwrap(), c.levels.get(&1).unwrap());
    }
}

#[test]
fn census_json_round_trip() {
    let c = enumerate_counts(&make_sl3(), 2, 1, DEFAULT_BUDGET).unwrap();
    let back = ProfileCensus::from_json(&c.to_json()).unwrap();
    assert_eq!(back.levels, c.levels);
    assert!(back.is_exact());
}

#[test]
fn sampled_census_is_not_exact() {
    let c = montecarlo_profiles(&make_sl3(), 5, 2, 1000, 7).unwrap();
    assert_eq!(c.total(2), 1000);
    assert!(zeta_coeffs(&c, 1, 1).is_err());
    let again = montecarlo_profiles(&make_sl3(), 5, 2, 1000, 7).unwrap();
    assert_eq!(c.levels, again.levels);
}
