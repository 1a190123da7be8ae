use a2zeta::dirichlet::*;
use a2zeta::finitezeta::{finite_zeta, FiniteGroup};
use a2zeta::{CountSeries, RationalSeries};
use num_rational::BigRational;
use proptest::prelude::*;

const CAP: u128 = 200;

fn series() -> impl Strategy<Value = CountSeries> {
    prop::collection::vec((1u128..=60, 0u128..5), 0..8)
        .prop_map(|terms| CountSeries::from_terms(CAP, terms).unwrap())
}

/// A series dominating `xi`: extra mass, and some terms moved to smaller degrees.
fn dominating(xi: CountSeries) -> impl Strategy<Value = (CountSeries, CountSeries)> {
    let n = xi.len();
    (series(), prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<prop::sample::Index>(), n))
        .prop_map(move |(extra, moves, targets)| {
            let mut eta = extra;
            for (((d, c), mv), target) in xi.terms().zip(moves).zip(targets) {
                let to = if mv { 1 + target.index(d as usize) as u128 } else { d };
                eta.add_term(to, *c).unwrap();
            }
            (xi.clone(), eta)
        })
}

fn dominated_pair() -> impl Strategy<Value = (CountSeries, CountSeries)> {
    series().prop_flat_map(dominating)
}

fn chain() -> impl Strategy<Value = (CountSeries, CountSeries, CountSeries)> {
    dominated_pair().prop_flat_map(|(a, b)| dominating(b).prop_map(move |(b, c)| (a.clone(), b, c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reflexive(xi in series()) {
        prop_assert!(dominates(&xi, &xi).unwrap());
    }

    #[test]
    fn transitive((a, b, c) in chain()) {
        prop_assert!(dominates(&a, &b).unwrap());
        prop_assert!(dominates(&b, &c).unwrap());
        prop_assert!(dominates(&a, &c).unwrap());
    }

    #[test]
    fn products_preserve_domination((x1, y1) in dominated_pair(), (x2, y2) in dominated_pair()) {
        prop_assert!(dominates(&product(&x1, &x2, CAP), &product(&y1, &y2, CAP)).unwrap());
    }

    #[test]
    fn sparse_product_agrees(a in series(), b in series()) {
        let mut c = a.clone();
        c.mul_assign_sparse(&b);
        prop_assert_eq!(c, product(&a, &b, CAP));
    }

    #[test]
    fn random_pairs_are_consistent(a in series(), b in series(), c in series()) {
        if dominates(&a, &b).unwrap() && dominates(&b, &c).unwrap() {
            prop_assert!(dominates(&a, &c).unwrap());
        }
    }
}

#[test]
fn rational_coefficients() {
    let half = BigRational::new(1.into(), 2.into());
    let xi = RationalSeries::from_terms(10, [(2, half.clone())]).unwrap();
    let eta = RationalSeries::from_terms(10, [(1, half.clone())]).unwrap();
    assert!(dominates(&xi, &eta).unwrap());
    assert!(RationalSeries::from_terms(10, [(1, -half)]).is_err());
}

#[test]
fn product_of_finite_zeta_functions() {
    let cap = 1u128 << 60;
    let a = CountSeries::from_multiset(&finite_zeta(FiniteGroup::Sl3, 2).unwrap(), cap);
    let b = CountSeries::from_multiset(&finite_zeta(FiniteGroup::Sl3, 5).unwrap(), cap);
    let total: u128 = product(&a, &b, cap).terms().map(|(_, c)| *c).sum();
    assert_eq!(total, 6 * finite_zeta(FiniteGroup::Sl3, 5).unwrap().class_count());
}

#[test]
fn psi_sums() {
    // sum of 4 q^-2 / (1 - q^-1) over primes in (10^4, 10^5], computed independently
    let r = psi_sum_over_primes(PsiTag::T4a, Form::Inner, 1.0, 100_000);
    assert!((r.cauchy_indicator - 3.605583891009201e-5).abs() < 1e-15);
    assert!(!r.expected_divergent);
    let r = psi_sum_over_primes(PsiTag::T4a, Form::Inner, 5.0 / 6.0 + 0.3, 100_000);
    assert!(r.cauchy_indicator < 1e-6);
    let r = psi_sum_over_primes(PsiTag::T2a, Form::Inner, 0.9, 1000);
    assert!(r.expected_divergent);
    assert_eq!(psi_sum_over_primes(PsiTag::T5, Form::Outer, 1.0, 3).sum, 0.0);
}

#[test]
fn sl3_euler_product_abscissa() {
    let est = euler_product_abscissa(|p| finite_zeta(FiniteGroup::Sl3, p).ok(), 2000, 4_000_000);
    assert!(est.largest_n > 0.8 && est.largest_n < 1.15, "{est:?}");
    assert!(est.trend > 0.0);
}
