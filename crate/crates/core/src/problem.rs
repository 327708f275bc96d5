//! Canonical Box-QP `min ½zᵀHz + hᵀz  s.t. −e ≤ z ≤ e`, its scaling, the
//! strictly feasible starting point, and the iterate/trace types shared by
//! both solvers.
//!
//! Multiplier naming follows the KKT system
//! `Hz + h + γ − θ = 0`, `z + φ = e`, `z − ψ = −e`, `γ∘φ = 0`, `θ∘ψ = 0`,
//! so `φ = 1 − z` is the slack of the upper bound (paired with `γ`) and
//! `ψ = 1 + z` is the slack of the lower bound (paired with `θ`).

use serde::Serialize;

use crate::approx::RankOneLog;
use crate::certificate::{Algorithm, Certificate, DEFAULT_ALPHA, DEFAULT_DELTA, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::linalg::{self, cholesky_factor, DenseMatrix, LinalgError};

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_SHIFT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxQP {
    hess: DenseMatrix,
    lin: Vec<f64>,
}

impl BoxQP {
    /// Checks shapes and finiteness. Symmetry and PSD are checked by
    /// [`BoxQP::validate`].
    pub fn new(hess: DenseMatrix, lin: Vec<f64>) -> Result<Self> {
        let n = lin.len();
        if n == 0 {
            return Err(Error::Shape("dimension n must be at least 1".into()));
        }
        if hess.rows() != n || hess.cols() != n {
            return Err(Error::Shape(format!(
                "H is {}x{} but h has length {n}",
                hess.rows(),
                hess.cols()
            )));
        }
        hess.check_finite()?;
        if lin.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("h contains a non-finite entry".into()));
        }
        Ok(Self { hess, lin })
    }

    pub fn n(&self) -> usize {
        self.lin.len()
    }

    pub fn hess(&self) -> &DenseMatrix {
        &self.hess
    }

    pub fn lin(&self) -> &[f64] {
        &self.lin
    }

    /// `½zᵀHz + hᵀz`.
    pub fn objective(&self, z: &[f64]) -> f64 {
        let hz = linalg::matvec(&self.hess, z).expect("dimension checked at construction");
        0.5 * linalg::dot(z, &hz) + linalg::dot(&self.lin, z)
    }

    pub fn validate(&self, check_psd: bool) -> Result<()> {
        if let Err(LinalgError::Asymmetric { row, col, gap }) = self.hess.check_symmetric(SYMMETRY_TOL) {
            return Err(Error::AsymmetricH { row, col, gap });
        }
        if check_psd {
            let mut shifted = self.hess.clone();
            let shift = PSD_SHIFT * self.hess.max_abs().max(1.0);
            shifted.add_diag(&vec![shift; self.n()]);
            cholesky_factor(&shifted).map_err(|_| Error::NotPsd)?;
        }
        Ok(())
    }

    /// Applies the cost-free scaling with `λ = α/√(2n)`.
    pub fn scale(&self, alpha: f64) -> Scaling {
        let hinf = linalg::norm_inf(&self.lin);
        if hinf == 0.0 {
            return Scaling::ZeroLinearTerm;
        }
        let n = self.n();
        let lambda = alpha / (2.0 * n as f64).sqrt();
        Scaling::Scaled(ScaledProblem {
            lambda,
            two_lam_htilde: self.hess.scaled(2.0 * lambda / hinf),
            htilde: self.lin.iter().map(|v| v / hinf).collect(),
            hinf,
        })
    }
}

#[derive(Debug, Clone)]
pub enum Scaling {
    /// `h = 0`: the optimum is `z* = 0`.
    ZeroLinearTerm,
    Scaled(ScaledProblem),
}

/// The problem after dividing by `‖h‖∞` and weighting by `2λ`.
#[derive(Debug, Clone)]
pub struct ScaledProblem {
    pub lambda: f64,
    /// `2λH̃ = (2λ/‖h‖∞)·H`.
    pub two_lam_htilde: DenseMatrix,
    /// `h̃ = h/‖h‖∞`, so `‖h̃‖∞ = 1`.
    pub htilde: Vec<f64>,
    pub hinf: f64,
}

impl ScaledProblem {
    pub fn n(&self) -> usize {
        self.htilde.len()
    }

    /// Strictly feasible, well-centered starting point:
    /// `z = 0, γ = e − λh̃, θ = e + λh̃, φ = ψ = e, τ = 1`.
    pub fn initialize(&self) -> Iterate {
        let n = self.n();
        let l = self.lambda;
        Iterate {
            z: vec![0.0; n],
            gamma: self.htilde.iter().map(|h| 1.0 - l * h).collect(),
            theta: self.htilde.iter().map(|h| 1.0 + l * h).collect(),
            phi: vec![1.0; n],
            psi: vec![1.0; n],
            tau: 1.0,
        }
    }

    pub fn kkt_residuals(&self, it: &Iterate) -> KktResiduals {
        let hz = linalg::matvec(&self.two_lam_htilde, &it.z).expect("iterate matches problem");
        let two_lam = 2.0 * self.lambda;
        let mut stationarity: f64 = 0.0;
        let mut primal_upper: f64 = 0.0;
        let mut primal_lower: f64 = 0.0;
        for i in 0..self.n() {
            stationarity = stationarity
                .max((hz[i] + two_lam * self.htilde[i] + it.gamma[i] - it.theta[i]).abs());
            primal_upper = primal_upper.max((it.z[i] + it.phi[i] - 1.0).abs());
            primal_lower = primal_lower.max((it.z[i] - it.psi[i] + 1.0).abs());
        }
        KktResiduals {
            stationarity,
            primal_lower,
            primal_upper,
            complementarity_gap: it.duality_gap(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktResiduals {
    pub stationarity: f64,
    /// `‖z − ψ + e‖∞`.
    pub primal_lower: f64,
    /// `‖z + φ − e‖∞`.
    pub primal_upper: f64,
    pub complementarity_gap: f64,
}

/// Primal-dual point. `x = (γ, θ)` and `s = (φ, ψ)` are views, never
/// materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub z: Vec<f64>,
    pub gamma: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub tau: f64,
}

impl Iterate {
    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// `xᵀs = γᵀφ + θᵀψ`.
    pub fn duality_gap(&self) -> f64 {
        linalg::dot(&self.gamma, &self.phi) + linalg::dot(&self.theta, &self.psi)
    }

    /// `‖x∘s − τe‖ / τ` against the given `tau`.
    pub fn neighborhood_norm(&self, tau: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n() {
            let a = self.gamma[i] * self.phi[i] - tau;
            let b = self.theta[i] * self.psi[i] - tau;
            acc += a * a + b * b;
        }
        acc.sqrt() / tau
    }

    /// Smallest entry among γ, θ, φ, ψ.
    pub fn min_entry(&self) -> f64 {
        [&self.gamma, &self.theta, &self.phi, &self.psi]
            .iter()
            .flat_map(|v| v.iter())
            .fold(f64::INFINITY, |acc, &v| acc.min(v))
    }

    /// Full unit step.
    pub fn apply(&mut self, d: &Direction) {
        for i in 0..self.n() {
            self.z[i] += d.dz[i];
            self.gamma[i] += d.dgamma[i];
            self.theta[i] += d.dtheta[i];
            self.phi[i] += d.dphi[i];
            self.psi[i] += d.dpsi[i];
        }
    }
}

/// Search direction. `dphi = −dz` and `dpsi = dz` hold exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub dz: Vec<f64>,
    pub dgamma: Vec<f64>,
    pub dtheta: Vec<f64>,
    pub dphi: Vec<f64>,
    pub dpsi: Vec<f64>,
}

impl Direction {
    /// `ΔxᵀΔs = ΔγᵀΔφ + ΔθᵀΔψ`.
    pub fn curvature(&self) -> f64 {
        linalg::dot(&self.dgamma, &self.dphi) + linalg::dot(&self.dtheta, &self.dpsi)
    }

    /// `(‖Δx/x‖∞, ‖Δs/s‖∞)` relative to `it`.
    pub fn relative_step(&self, it: &Iterate) -> (f64, f64) {
        let mut x: f64 = 0.0;
        let mut s: f64 = 0.0;
        for i in 0..it.n() {
            x = x
                .max((self.dgamma[i] / it.gamma[i]).abs())
                .max((self.dtheta[i] / it.theta[i]).abs());
            s = s
                .max((self.dphi[i] / it.phi[i]).abs())
                .max((self.dpsi[i] / it.psi[i]).abs());
        }
        (x, s)
    }
}

/// Multiplies τ by `factor` right after iteration `at` (test hook for audits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauFault {
    pub at: u64,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub epsilon: f64,
    pub alpha: f64,
    /// Approximation band; only used by the approximated-Newton solver.
    pub delta: f64,
    /// Stop as soon as the gap drops below `epsilon`. Off by default: the
    /// certificate promises a fixed iteration count.
    pub early_stop: bool,
    pub record_trace: bool,
    /// Per-iteration consistency checks (stationarity, `M·B = I`, `d`).
    pub debug_checks: bool,
    /// Re-invert `M` from scratch every `k` iterations. Never by default.
    pub reinvert_every: Option<u64>,
    #[doc(hidden)]
    pub tau_fault: Option<TauFault>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            alpha: DEFAULT_ALPHA,
            delta: DEFAULT_DELTA,
            early_stop: false,
            record_trace: false,
            debug_checks: false,
            reinvert_every: None,
            tau_fault: None,
        }
    }
}

impl SolverOptions {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn with_debug_checks(mut self) -> Self {
        self.debug_checks = true;
        self
    }
}

/// One row of the per-iteration trace. `tau` is the value after the update
/// at the end of iteration `k`; `neighborhood_norm` is measured against it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: u64,
    pub tau: f64,
    pub duality_gap: f64,
    pub neighborhood_norm: f64,
    pub cumulative_rank1: u64,
    pub rank1_this_iter: u64,
    pub min_entry: f64,
    /// `ΔxᵀΔs` of the step taken.
    pub curvature: f64,
    /// `max(‖Δx/x‖∞, ‖Δs/s‖∞)` relative to the pre-step iterate.
    pub relative_step: f64,
    /// Largest `max(t/c, c/t)` over tilde/current pairs after the refresh
    /// (1 for the exact algorithm).
    pub ratio_band: f64,
    /// Stationarity residual after the step; NaN unless debug checks are on.
    pub stationarity: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub algorithm: Algorithm,
    pub z_star: Vec<f64>,
    pub duality_gap: f64,
    pub iterations_run: u64,
    pub rank1_used: u64,
    /// `None` when `h = 0` short-circuits the solve.
    pub certificate: Option<Certificate>,
    #[serde(skip)]
    pub trace: Option<IterationTrace>,
    /// Per-iteration rank-1 counts; approximated solver only.
    #[serde(skip)]
    pub rank1_log: Option<RankOneLog>,
}

impl Solution {
    pub(crate) fn zero(algorithm: Algorithm, n: usize, record_trace: bool) -> Self {
        Self {
            algorithm,
            z_star: vec![0.0; n],
            duality_gap: 0.0,
            iterations_run: 0,
            rank1_used: 0,
            certificate: None,
            trace: record_trace.then(IterationTrace::default),
            rank1_log: None,
        }
    }
}

/// Validates then scales `p`, returning `None` for `h = 0`.
pub(crate) fn prepare(p: &BoxQP, opts: &SolverOptions) -> Result<Option<ScaledProblem>> {
    p.validate(false)?;
    if !(opts.epsilon > 0.0) {
        return Err(Error::Shape(format!("epsilon = {} must be positive", opts.epsilon)));
    }
    Ok(match p.scale(opts.alpha) {
        Scaling::ZeroLinearTerm => None,
        Scaling::Scaled(sp) => Some(sp),
    })
}
