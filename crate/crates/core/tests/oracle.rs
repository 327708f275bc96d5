use certiqp::harness::{oracle_active_set, random_boxqp};
use certiqp::{solve, Algorithm, SolverOptions};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// Singular H with a zero multiplier at the optimum; the error decays like
// the square root of the gap, so 1e-8 is not enough here.
#[test]
fn degenerate_seed_1012_matches_oracle_at_tight_tolerance() {
    let p = random_boxqp(5, 1012, 0.5);
    let oracle = oracle_active_set(&p).unwrap();
    let opts = SolverOptions::default().with_epsilon(1e-12);
    for algo in [Algorithm::Exact, Algorithm::Approx] {
        let z = solve(&p, algo, &opts).unwrap().z_star;
        let d = max_diff(&z, &oracle);
        assert!(d <= 1e-5, "{algo}: {d:e}");
    }
}
