//! Data-independent execution-time certificates.
//!
//! Both solvers run a fixed number of iterations that depends only on the
//! problem dimension `n`, the optimality level `epsilon`, and the step
//! parameters `alpha` (neighborhood radius) and `delta` (approximation band).
//! Nothing in this module looks at problem data.

use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_ALPHA: f64 = 0.3;
pub const DEFAULT_DELTA: f64 = 0.15;
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertificateError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Exact Newton step, one Cholesky factorization per iteration.
    Exact,
    /// Approximated Newton step with Sherman–Morrison inverse maintenance.
    Approx,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Exact => "exact",
            Algorithm::Approx => "approx",
        })
    }
}

/// Step constants for the exact-Newton algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alg1Constants {
    pub n: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub beta: f64,
    pub mu: f64,
}

/// Step constants for the approximated-Newton algorithm. `eta` bounds the
/// relative step `‖Δx/x‖` and coincides with `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alg2Constants {
    pub n: usize,
    pub alpha: f64,
    pub delta: f64,
    pub sigma: f64,
    pub beta: f64,
    pub mu: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Constants {
    Exact(Alg1Constants),
    Approx(Alg2Constants),
}

impl Constants {
    pub fn alpha(&self) -> f64 {
        match self {
            Constants::Exact(c) => c.alpha,
            Constants::Approx(c) => c.alpha,
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            Constants::Exact(c) => c.beta,
            Constants::Approx(c) => c.beta,
        }
    }

    pub fn sigma(&self) -> f64 {
        match self {
            Constants::Exact(c) => c.sigma,
            Constants::Approx(c) => c.sigma,
        }
    }

    /// Relative step bound; for the exact algorithm this is `alpha/(1-alpha)`.
    pub fn eta(&self) -> f64 {
        match self {
            Constants::Exact(c) => c.mu,
            Constants::Approx(c) => c.eta,
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            Constants::Exact(_) => 0.0,
            Constants::Approx(c) => c.delta,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Constants::Exact(c) => c.n,
            Constants::Approx(c) => c.n,
        }
    }

    /// Per-iteration contraction factor of the path parameter.
    pub fn tau_factor(&self) -> f64 {
        1.0 - self.beta() / (2.0 * self.n() as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub n: usize,
    pub epsilon: f64,
    pub algorithm: Algorithm,
    pub n_iter: u64,
    /// Upper bound on rank-1 updates; `None` for the exact algorithm.
    pub n_rank1_bound: Option<u64>,
    pub constants: Constants,
    /// Rough floating-point operation count. An estimate, not a contract.
    pub flop_estimate: f64,
}

fn beta_for(n: usize, alpha: f64, sigma: f64) -> f64 {
    (alpha - sigma) / (1.0 + alpha / (2.0 * n as f64).sqrt())
}

fn check_dimension(n: usize) -> Result<(), CertificateError> {
    if n == 0 {
        return Err(CertificateError::InvalidParameter("dimension n must be at least 1".into()));
    }
    Ok(())
}

pub fn alg1_constants(n: usize, alpha: f64) -> Result<Alg1Constants, CertificateError> {
    check_dimension(n)?;
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(CertificateError::InvalidParameter(format!(
            "alpha = {alpha} must lie in (0, 0.5)"
        )));
    }
    let sigma = alpha * alpha / (2.0 * (1.0 - alpha));
    let beta = beta_for(n, alpha, sigma);
    let mu = alpha / (1.0 - alpha);
    Ok(Alg1Constants {
        n,
        alpha,
        sigma,
        beta,
        mu,
    })
}

pub fn alg2_constants(n: usize, alpha: f64, delta: f64) -> Result<Alg2Constants, CertificateError> {
    check_dimension(n)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CertificateError::InvalidParameter(format!(
            "alpha = {alpha} must lie in (0, 1)"
        )));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(CertificateError::InvalidParameter(format!(
            "delta = {delta} must be non-negative"
        )));
    }
    let g = 1.0 + delta;
    let sigma = 2f64.sqrt() * delta * g * g * alpha * ((1.0 + alpha) / (1.0 - alpha)).sqrt()
        + g * g * alpha * alpha / (2.0 * (1.0 - alpha));
    let mu = g * g * g * alpha / (1.0 - alpha);
    if !(mu < 1.0) {
        return Err(CertificateError::InvalidParameter(format!(
            "(alpha, delta) = ({alpha}, {delta}) gives mu = {mu} >= 1"
        )));
    }
    let beta = beta_for(n, alpha, sigma);
    if !(beta > 0.0) {
        return Err(CertificateError::InvalidParameter(format!(
            "(alpha, delta) = ({alpha}, {delta}) gives beta = {beta} <= 0"
        )));
    }
    Ok(Alg2Constants {
        n,
        alpha,
        delta,
        sigma,
        beta,
        mu,
        eta: mu,
    })
}

/// `⌈x⌉`, after nudging `x` down by one ulp so that a value that should be an
/// exact integer but rounded up by a hair does not gain a spurious +1.
fn guarded_ceil(x: f64) -> u64 {
    let nudged = if x > 0.0 && x.is_finite() {
        f64::from_bits(x.to_bits() - 1)
    } else {
        x
    };
    nudged.ceil().max(0.0) as u64
}

/// Certified iteration count
/// `⌈ln((2n + α√(2n))/ε) / −ln(1 − β/√(2n))⌉`.
pub fn iteration_count(n: usize, epsilon: f64, alpha: f64, beta: f64) -> Result<u64, CertificateError> {
    check_dimension(n)?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(CertificateError::InvalidParameter(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    let root = (2.0 * n as f64).sqrt();
    let numerator = ((2.0 * n as f64 + alpha * root) / epsilon).ln();
    let denominator = -(-beta / root).ln_1p();
    Ok(guarded_ceil(numerator / denominator).max(1))
}

/// Upper bound on the total number of rank-1 updates,
/// `⌈4η(N_iter − 1)√n / ((1 − η) ln(1 + δ))⌉`.
pub fn rank1_count_bound(n: usize, n_iter: u64, c: &Alg2Constants) -> u64 {
    if n_iter <= 1 {
        return 0;
    }
    if c.delta == 0.0 {
        // δ = 0 means every coordinate is refreshed every iteration.
        return n as u64 * n_iter;
    }
    let x = 4.0 * c.eta * (n_iter - 1) as f64 * (n as f64).sqrt()
        / ((1.0 - c.eta) * c.delta.ln_1p());
    guarded_ceil(x)
}

/// Builds the full certificate. `delta` is ignored for the exact algorithm.
pub fn certify(
    n: usize,
    epsilon: f64,
    algorithm: Algorithm,
    alpha: f64,
    delta: f64,
) -> Result<Certificate, CertificateError> {
    let nf = n as f64;
    let (constants, n_iter, n_rank1_bound, flop_estimate) = match algorithm {
        Algorithm::Exact => {
            let c = alg1_constants(n, alpha)?;
            let n_iter = iteration_count(n, epsilon, c.alpha, c.beta)?;
            let flops = n_iter as f64 * (nf * nf * nf / 3.0 + 9.0 * nf * nf);
            (Constants::Exact(c), n_iter, None, flops)
        }
        Algorithm::Approx => {
            let c = alg2_constants(n, alpha, delta)?;
            let n_iter = iteration_count(n, epsilon, c.alpha, c.beta)?;
            let bound = rank1_count_bound(n, n_iter, &c);
            let flops = nf * nf * nf + 2.0 * nf * nf * bound as f64 + 8.0 * nf * nf * n_iter as f64;
            (Constants::Approx(c), n_iter, Some(bound), flops)
        }
    };
    Ok(Certificate {
        n,
        epsilon,
        algorithm,
        n_iter,
        n_rank1_bound,
        constants,
        flop_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alg1_footnote_values() {
        let c = alg1_constants(10, 0.3).unwrap();
        assert!((c.mu - 0.4286).abs() < 5e-5);
        assert!((c.sigma - 0.0643).abs() < 5e-5);
    }

    #[test]
    fn alg1_small_alpha_limit() {
        let c = alg1_constants(10, 1e-9).unwrap();
        assert!(c.sigma < 1e-17 && c.mu < 2e-9);
    }

    #[test]
    fn alg1_beta_identity() {
        let c = alg1_constants(50, 0.3).unwrap();
        let lhs = c.beta * (1.0 + c.alpha / (100f64).sqrt()) + c.sigma;
        assert!((lhs - c.alpha).abs() < 1e-14);
    }

    #[test]
    fn alg1_rejects_alpha_outside_range() {
        for a in [0.0, 0.5, 0.7, -0.1, f64::NAN] {
            assert!(alg1_constants(4, a).is_err(), "alpha {a}");
        }
    }

    #[test]
    fn alg2_footnote_values() {
        let c = alg2_constants(40, 0.3, 0.15).unwrap();
        assert!((c.mu - 0.6518).abs() < 5e-5);
        assert!((c.sigma - 0.1997).abs() < 5e-5);
        assert_eq!(c.mu, c.eta);
    }

    #[test]
    fn alg2_with_zero_delta_matches_alg1() {
        for n in [1, 3, 40, 1000] {
            let a = alg1_constants(n, 0.3).unwrap();
            let b = alg2_constants(n, 0.3, 0.0).unwrap();
            assert!((a.mu - b.mu).abs() <= 1e-15);
            assert!((a.sigma - b.sigma).abs() <= 1e-15);
            assert!((a.beta - b.beta).abs() <= 1e-15);
        }
    }

    #[test]
    fn alg2_rejects_large_mu() {
        // (1.5)^3 * 0.45 / 0.55 ≈ 2.76
        assert!(matches!(
            alg2_constants(10, 0.45, 0.5),
            Err(CertificateError::InvalidParameter(_))
        ));
    }

    #[test]
    fn iteration_count_reference_values() {
        let c = alg2_constants(40, 0.3, 0.15).unwrap();
        assert_eq!(iteration_count(40, 1e-6, c.alpha, c.beta).unwrap(), 1672);
        // extended-precision evaluation: 2745.9955...
        let c = alg2_constants(100, 0.3, 0.15).unwrap();
        assert_eq!(iteration_count(100, 1e-6, c.alpha, c.beta).unwrap(), 2746);
    }

    #[test]
    fn iteration_count_monotone_in_n() {
        let a = alg2_constants(100, 0.3, 0.15).unwrap();
        let b = alg2_constants(200, 0.3, 0.15).unwrap();
        assert!(iteration_count(200, 1e-6, b.alpha, b.beta).unwrap() > iteration_count(100, 1e-6, a.alpha, a.beta).unwrap());
    }

    #[test]
    fn rank1_bound_edge_and_monotone() {
        let c = alg2_constants(40, 0.3, 0.15).unwrap();
        assert_eq!(rank1_count_bound(40, 1, &c), 0);
        let mut prev = 0;
        for k in 2..200 {
            let b = rank1_count_bound(40, k, &c);
            assert!(b > prev);
            prev = b;
        }
    }

    #[test]
    fn guarded_ceil_at_integers() {
        assert_eq!(guarded_ceil(3.0), 3);
        assert_eq!(guarded_ceil(3.0000001), 4);
        assert_eq!(guarded_ceil(2.5), 3);
    }

    #[test]
    fn certify_smallest_dimension() {
        let c = certify(1, 1e-6, Algorithm::Exact, 0.3, 0.0).unwrap();
        assert!(c.n_iter >= 1);
        assert!(c.n_rank1_bound.is_none());
        assert!(c.flop_estimate.is_finite());
    }

    #[test]
    fn certify_is_deterministic() {
        let a = certify(57, 1e-7, Algorithm::Approx, 0.3, 0.15).unwrap();
        let b = certify(57, 1e-7, Algorithm::Approx, 0.3, 0.15).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.flop_estimate.to_bits(), b.flop_estimate.to_bits());
    }

    #[test]
    fn defaults_admissible_for_all_n() {
        for n in 1..2000 {
            let c = alg2_constants(n, DEFAULT_ALPHA, DEFAULT_DELTA).unwrap();
            assert!(c.sigma < c.alpha && c.beta > 0.0);
            assert!(c.sigma <= 3.0 * c.alpha);
        }
    }
}
