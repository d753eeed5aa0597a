use closefact::factorization::{
    check_structure, compute_skews, derive_case, equal_skew_identity, reconstruct_ab, skew_ratio_bound,
    verify_quadruple, CloseFactorization, Offset,
};
use closefact::pell::{
    auto_obstruct, bounded_search, default_moduli, fundamental_solution, prime_power_obstruction,
    qnr_obstruction, residue_obstruction, PellEquation, Prime,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

/// Offsets `a <= cap` of `(A, B)` found by testing which `A + a` divide
/// `n`, without the `aB = b(A + a)` shortcut the library uses.
fn naive_offsets(big_a: u64, big_b: u64, cap: u64) -> Vec<(u64, u64)> {
    let n = big_a * big_b;
    (1..=cap)
        .filter(|a| n % (big_a + a) == 0)
        .map(|a| (a, big_b - n / (big_a + a)))
        .filter(|&(_, b)| b >= 1)
        .collect()
}

fn build(big_a: u64, big_b: u64, offs: &[(u64, u64)]) -> CloseFactorization {
    let offsets: Vec<Offset> = offs.iter().map(|&(a, b)| Offset::new(a, b)).collect();
    verify_quadruple(&BigInt::from(big_a * big_b), &BigInt::from(big_a), &BigInt::from(big_b), &offsets)
        .expect("naive offsets form a valid factorization")
}

/// `A = a u`, `B = b (u + 1)` always carries the offset `(a, b)`.
fn seeded_pair() -> impl Strategy<Value = (u64, u64)> {
    (2u64..64, 1u64..64, 1u64..400).prop_filter_map("needs b < a and B <= A", |(a, b, u)| {
        (b < a && b * (u + 1) <= a * u).then_some((a * u, b * (u + 1)))
    })
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn accepted_tuples_satisfy_every_identity((big_a, big_b) in seeded_pair()) {
        let offs = naive_offsets(big_a, big_b, 64);
        prop_assert!(!offs.is_empty());
        let cf = build(big_a, big_b, &offs);
        let report = check_structure(&cf);
        prop_assert!(report.offsets_dominate && report.gaps_dominate);
        for o in cf.offsets() {
            prop_assert_eq!(&o.a * cf.b() - &o.b * cf.a(), &o.a * &o.b);
        }
        for quad in cf.sub_tuples(3) {
            prop_assert!(check_structure(&quad).all_pass());
            let skews = compute_skews(quad.offsets()).unwrap();
            let (a, b) = reconstruct_ab(quad.offsets(), &skews).unwrap();
            prop_assert_eq!((&a, &b), (cf.a(), cf.b()));
            let case = derive_case(&quad).unwrap();
            prop_assert!(case.km_identity_holds());
            prop_assert!(case.k_dominates());
            prop_assert!(case.gcd_divides_skew());
            prop_assert!(case.pell_holds());
            if skews.d31 == skews.d32 {
                prop_assert!(equal_skew_identity(&quad).unwrap());
            }
        }
    }

    #[test]
    fn json_round_trip((big_a, big_b) in seeded_pair()) {
        let offs = naive_offsets(big_a, big_b, 64);
        prop_assert!(!offs.is_empty());
        let cf = build(big_a, big_b, &offs);
        let text = serde_json::to_string(&cf).unwrap();
        let back: CloseFactorization = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, cf);
    }

    #[test]
    fn obstruction_is_sound(k in 1i64..200, m in 1i64..200, x in 1u64..60, y in 1u64..60) {
        let tau = k * (x * x) as i64 - m * (y * y) as i64;
        prop_assume!(tau != 0);
        let eq = PellEquation::new(k, m, tau).unwrap();
        prop_assert!(auto_obstruct(&eq, &default_moduli()).is_none());
        prop_assert!(bounded_search(&eq, 60).contains(&(x, y)));
    }

    #[test]
    fn certificates_reverify(k in 1i64..300, m in 1i64..300, tau in -60i64..60) {
        prop_assume!(tau != 0);
        let eq = PellEquation::new(k, m, tau).unwrap();
        if let Some(c) = auto_obstruct(&eq, &default_moduli()) {
            prop_assert!(c.verify(&eq));
            prop_assert!(bounded_search(&eq, 300).is_empty());
        }
    }

    #[test]
    fn lemma_certificates_are_residue_certificates(k in 1i64..400, m in 1i64..400, tau in -80i64..80) {
        prop_assume!(tau != 0);
        let eq = PellEquation::new(k, m, tau).unwrap();
        for p in Prime::up_to(13) {
            if let Some(c) = prime_power_obstruction(&eq, p) {
                prop_assert!(c.verify(&eq));
                prop_assert!(residue_obstruction(&eq, c.modulus()).is_some());
            }
            if let Some(c) = qnr_obstruction(&eq, p) {
                prop_assert!(c.verify(&eq));
                prop_assert!(residue_obstruction(&eq, c.modulus()).is_some());
            }
        }
    }
}

/// Every tuple with at least three offsets in a small window, checked
/// against the lemmas that need three offsets.
#[test]
fn small_window_quadruples_satisfy_lemmas() {
    let mut seen = 0;
    for big_a in 2u64..=500 {
        for big_b in 1..=big_a {
            let offs = naive_offsets(big_a, big_b, 30);
            if offs.len() < 3 {
                continue;
            }
            let cf = build(big_a, big_b, &offs);
            for quad in cf.sub_tuples(3) {
                seen += 1;
                assert!(check_structure(&quad).all_pass());
                let o = quad.offsets();
                let s = compute_skews(o).unwrap();
                let case = derive_case(&quad).unwrap();
                assert!(case.km_identity_holds() && case.k_dominates() && case.pell_holds());
                for (i, j, d) in [(1, 0, &s.d21), (2, 0, &s.d31), (2, 1, &s.d32)] {
                    let lambda = BigRational::new(&o[i].a - &o[j].a, o[j].a.clone());
                    let bound = skew_ratio_bound(&lambda, &o[2].a, d);
                    assert!(BigRational::from_integer(quad.a().clone()) <= bound);
                }
                if s.d31 == s.d32 {
                    assert!(equal_skew_identity(&quad).unwrap());
                }
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn unit_powers_satisfy_pell_identity() {
    let u = fundamental_solution(6).unwrap();
    for i in 1..=24 {
        let (x, y) = u.power(i);
        assert_eq!(&x * &x - big(6) * &y * &y, big(1), "i = {i}");
    }
    assert_eq!(u.power(2), (big(49), big(20)));
}

#[test]
fn fundamental_solutions_match_brute_force() {
    for d in 2u64..=50 {
        let r = (d as f64).sqrt() as u64;
        if r * r == d {
            assert!(fundamental_solution(d).is_err());
            continue;
        }
        // smallest y with 1 + d y^2 a perfect square
        let (x, y) = (1u64..)
            .find_map(|y| {
                let x2 = 1 + d * y * y;
                let x = (x2 as f64).sqrt().round() as u64;
                (x * x == x2).then_some((x, y))
            })
            .unwrap();
        let u = fundamental_solution(d).unwrap();
        assert_eq!((u.x, u.y), (big(x), big(y)), "D = {d}");
    }
}

#[test]
fn equal_skew_checker_rejects_synthetic_counterexample() {
    use closefact::factorization::shifted_product_identity;
    assert!(!shifted_product_identity(&big(10), &big(1), &big(2), &big(4)));
    assert!(shifted_product_identity(&big(2), &big(1), &big(2), &big(4)));
}

#[test]
fn flagship_structure() {
    let offsets = [Offset::new(60, 49), Offset::new(169, 138), Offset::new(267, 218)];
    let cf = verify_quadruple(&big(665165362680), &big(902460), &big(737058), &offsets).unwrap();
    assert!(check_structure(&cf).all_pass());
    let s = compute_skews(cf.offsets()).unwrap();
    assert_eq!(&s.d31 * big(169) - &s.d21 * big(267), big(240));
    assert_eq!(&s.d32 * big(60), big(240));
    let k3 = verify_quadruple(
        &big(3950100),
        &big(2079),
        &big(1900),
        &[Offset::new(11, 10), Offset::new(21, 19)],
    );
    assert!(k3.is_ok());
}
