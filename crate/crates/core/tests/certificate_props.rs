use certiqp::certificate::{alg1_constants, alg2_constants, iteration_count, rank1_count_bound};
use certiqp::{certify, Algorithm};
use proptest::prelude::*;

const ALPHA: f64 = 0.3;
const DELTA: f64 = 0.15;

proptest! {
    #[test]
    fn certify_is_pure(n in 1usize..5000, log_eps in -12.0f64..-1.0, exact in any::<bool>()) {
        let algo = if exact { Algorithm::Exact } else { Algorithm::Approx };
        let eps = 10f64.powf(log_eps);
        let a = certify(n, eps, algo, ALPHA, DELTA).unwrap();
        let b = certify(n, eps, algo, ALPHA, DELTA).unwrap();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn zero_delta_reduces_to_exact_constants(n in 1usize..100_000, alpha in 0.01f64..0.49) {
        let c1 = alg1_constants(n, alpha).unwrap();
        let c2 = alg2_constants(n, alpha, 0.0).unwrap();
        prop_assert!((c1.mu - c2.mu).abs() <= 1e-15);
        prop_assert!((c1.sigma - c2.sigma).abs() <= 1e-15);
        prop_assert!((c1.beta - c2.beta).abs() <= 1e-15);
    }

    #[test]
    fn defaults_are_admissible(n in 1usize..1_000_000) {
        let c = alg2_constants(n, ALPHA, DELTA).unwrap();
        prop_assert!(c.sigma < c.alpha);
        prop_assert!(c.beta > 0.0);
        prop_assert!(c.sigma <= 3.0 * c.alpha);
        let c1 = alg1_constants(n, ALPHA).unwrap();
        prop_assert!(c1.sigma < c1.alpha && c1.beta > 0.0);
    }

    #[test]
    fn counts_are_monotone(n in 1usize..2000, log_eps in -12.0f64..-2.0) {
        let c = alg2_constants(n, ALPHA, DELTA).unwrap();
        let eps = 10f64.powf(log_eps);
        let k = iteration_count(n, eps, c.alpha, c.beta).unwrap();
        prop_assert!(iteration_count(n, eps / 10.0, c.alpha, c.beta).unwrap() >= k);
        prop_assert!(iteration_count(n + 1, eps, c.alpha, c.beta).unwrap() >= k);
        prop_assert!(rank1_count_bound(n, k + 1, &c) >= rank1_count_bound(n, k, &c));
    }
}

#[test]
fn reference_values() {
    let cases = [
        (40, 1e-6, 1672, 566201),
        (100, 1e-6, 2746, 0),
        (100, 1e-8, 3407, 1824770),
        (200, 1e-6, 4003, 3032185),
        (200, 1e-8, 4933, 3736815),
        (3, 1e-6, 424, 39253),
        (2, 1e-6, 345, 26064),
    ];
    for (n, eps, k, r) in cases {
        let c = certify(n, eps, Algorithm::Approx, ALPHA, DELTA).unwrap();
        assert_eq!(c.n_iter, k, "n={n} eps={eps}");
        if r > 0 {
            assert_eq!(c.n_rank1_bound, Some(r), "n={n} eps={eps}");
        }
    }
    assert_eq!(certify(500, 1e-6, Algorithm::Exact, ALPHA, DELTA).unwrap().n_iter, 2798);
}
