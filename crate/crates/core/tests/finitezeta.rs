use a2zeta::finitezeta::*;

#[test]
fn polynomial_identities_hold_for_every_branch() {
    for g in FiniteGroup::ALL {
        let branches = match g {
            FiniteGroup::Sl3 | FiniteGroup::Su3 => vec![Some(1), Some(2)],
            _ => vec![None],
        };
        for b in branches {
            assert!(polynomial_identity_holds(g, b).unwrap(), "{g} {b:?}");
        }
    }
}

#[test]
fn sum_md2_is_group_order() {
    for g in FiniteGroup::ALL {
        for q in [2u64, 4, 5, 7, 8, 9, 11, 13, 16, 25] {
            let Ok(z) = finite_zeta(g, q) else { continue };
            assert_eq!(z.sum_md2(), group_order(g, q), "{g} q={q}");
        }
    }
}

#[test]
fn class_counts_by_brute_force() {
    let cases = [
        (FiniteGroup::Sl3, 2, 6),
        (FiniteGroup::Su3, 2, 16),
        (FiniteGroup::Gl2, 2, 3),
        (FiniteGroup::Gu2, 2, 9),
        (FiniteGroup::Heisenberg, 2, 5),
        (FiniteGroup::Heisenberg, 3, 11),
        (FiniteGroup::Gl2, 3, 8),
    ];
    for (g, q, classes) in cases {
        assert_eq!(finite_zeta(g, q).unwrap().class_count(), classes, "{g} q={q}");
        assert_eq!(class_number_bruteforce(g, q, 1 << 24).unwrap(), classes, "{g} q={q}");
    }
}

#[test]
fn report_serializes() {
    let r = finite_zeta_report(FiniteGroup::Su3, 2, Some(1 << 20)).unwrap();
    assert_eq!(r.checks.sum_md2, 216);
    assert_eq!(r.checks.classes_bruteforce, Some(16));
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["group"], "su3");
}
