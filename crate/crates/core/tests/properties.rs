use kmoments::arith::{self, q1_window, q2_window, FactorMode};
use kmoments::expsums::{k_brute, k_bulk, k_chi};
use kmoments::{character_group, choose_factorization, enumerate_smooth_squarefree, DirichletCharacter, Modulus};
use num_complex::Complex64;
use proptest::prelude::*;

fn squarefree(max: u64) -> impl Strategy<Value = Modulus> {
    (2..=max).prop_filter_map("squarefree", |n| Modulus::new(n).ok())
}

fn character(max: u64) -> impl Strategy<Value = DirichletCharacter> {
    squarefree(max).prop_flat_map(|m| {
        let exps: Vec<_> = m.primes().iter().map(|&p| 0..p - 1).collect();
        (Just(m), exps).prop_map(|(m, e)| DirichletCharacter::new(&m, e).unwrap())
    })
}

fn primitive(max: u64) -> impl Strategy<Value = DirichletCharacter> {
    squarefree(max).prop_filter("has primitive characters", |m| m.q() % 2 == 1).prop_flat_map(|m| {
        let exps: Vec<_> = m.primes().iter().map(|&p| 1..p - 1).collect();
        (Just(m), exps).prop_map(|(m, e)| DirichletCharacter::new(&m, e).unwrap())
    })
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characters_are_completely_multiplicative(chi in character(300), m in -1000i64..1000, n in -1000i64..1000) {
        prop_assert!(close(chi.evaluate(m * n), chi.evaluate(m) * chi.evaluate(n), 1e-12));
    }

    #[test]
    fn characters_are_periodic_and_vanish_off_units(chi in character(300), n in 0i64..10_000) {
        let q = chi.q() as i64;
        prop_assert!(close(chi.evaluate(n), chi.evaluate(n + q), 1e-12));
        let v = chi.evaluate(n);
        if arith::gcd(n as u64, q as u64) == 1 {
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        } else {
            prop_assert_eq!(v, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn crt_components_reassemble(chi in character(300), n in 0i64..10_000) {
        let mut prod = Complex64::new(1.0, 0.0);
        for &p in chi.modulus().primes() {
            prod *= chi.component(p).unwrap().evaluate(n);
        }
        prop_assert!(close(prod, chi.evaluate(n), 1e-12));
    }

    #[test]
    fn group_index_round_trips(chi in character(300)) {
        let back = DirichletCharacter::from_group_index(chi.modulus(), chi.group_index()).unwrap();
        prop_assert_eq!(&back, &chi);
        let parsed: DirichletCharacter = chi.to_string().parse().unwrap();
        prop_assert_eq!(parsed, chi);
    }

    #[test]
    fn orthogonality(m in squarefree(60), a in 0u64..60, b in 0u64..60) {
        let q = m.q();
        let s: Complex64 = character_group(&m, false).map(|c| c.evaluate(a as i64) * c.evaluate(b as i64).conj()).sum();
        let expected = if arith::gcd(a, q) == 1 && a % q == b % q { m.phi() as f64 } else { 0.0 };
        prop_assert!(close(s, Complex64::new(expected, 0.0), 1e-9), "q={} a={} b={} s={}", q, a, b, s);
    }

    #[test]
    fn twisted_multiplicativity(chi in primitive(400)) {
        let diff = k_bulk(&chi).unwrap().max_diff(&k_brute(&chi).unwrap());
        prop_assert!(diff <= 1e-9 * chi.q() as f64, "{} diff {}", chi, diff);
    }

    #[test]
    fn weil_bound_off_the_diagonal(chi in primitive(400), k in -500i64..500, l in -500i64..500) {
        let q = chi.q();
        prop_assume!(arith::gcd(arith::rem(l, q), q) == 1);
        let bound = (1u64 << chi.modulus().omega()) as f64;
        prop_assert!(k_chi(&chi, k, l).unwrap().norm() <= bound * (1.0 + 1e-9));
    }

    #[test]
    fn factorization_lands_in_windows(idx in 0usize..10_000, eps in 0.001f64..0.06, delta in 0.18f64..0.3) {
        let family = enumerate_smooth_squarefree(10_000_000, 19, 5);
        let m = &family[idx % family.len()];
        let v = (m.q() as f64).powf(delta + eps);
        if let Ok(f) = choose_factorization(m, v, delta, FactorMode::Twelfth) {
            let (q1, q2, q3) = f.parts();
            prop_assert_eq!(q1 * q2 * q3, m.q());
            let w1 = q1_window(m.q(), v, delta);
            let w2 = q2_window(m.q(), q1, v, delta, FactorMode::Twelfth);
            let (l1, l2) = ((q1 as f64).ln(), (q2 as f64).ln());
            prop_assert!(l1 >= w1.lo - 1e-9 && l1 <= w1.hi + 1e-9);
            prop_assert!(l2 >= w2.lo - 1e-9 && l2 <= w2.hi + 1e-9);
        }
    }
}

#[test]
fn smooth_enumeration_matches_trial_division() {
    for (limit, y, k) in [(2000u64, 13u64, 1usize), (5000, 7, 2), (30_000, 31, 3)] {
        let mut fast: Vec<u64> = enumerate_smooth_squarefree(limit, y, k).iter().map(Modulus::q).collect();
        fast.sort_unstable();
        let brute: Vec<u64> = (2..=limit)
            .filter(|&n| {
                let f = arith::factorize(n);
                f.iter().all(|&(p, e)| e == 1 && p <= y) && f.len() >= k
            })
            .collect();
        assert_eq!(fast, brute, "limit={limit} y={y} k={k}");
    }
}

#[test]
fn factorization_succeeds_near_threshold() {
    let m = Modulus::new(9_699_690).unwrap();
    for t in [0.205, 0.21, 0.22, 0.24] {
        let f = choose_factorization(&m, (m.q() as f64).powf(t), 0.2, FactorMode::Twelfth).unwrap();
        assert_eq!(f.q1() * f.q2() * f.q3(), m.q());
    }
}
