//! Feasible path-following IPM with the approximated Newton step.
//!
//! The Newton system is assembled from lagged copies `γ̃, θ̃, φ̃, ψ̃` of the
//! iterate. A lagged entry is refreshed only when it drifts outside the band
//! `[1/(1+δ), 1+δ]` relative to the current value, so the system matrix
//! `B = 2λH̃ + diag(d)` with `d = γ̃/φ̃ + θ̃/ψ̃` changes by diagonal bumps only.
//! `M = B⁻¹` is inverted once and then kept current with one Sherman–Morrison
//! rank-1 correction per refreshed index. Each iteration is therefore a
//! handful of rank-1 updates plus one matrix-vector product.

use log::warn;
use serde::Serialize;

use crate::certificate::{certify, Algorithm};
use crate::error::{Error, Result};
use crate::ipm::{self, NewtonStep, Step};
use crate::linalg::{self, rank1_symmetric_update, spd_inverse, DenseMatrix};
use crate::problem::{prepare, BoxQP, Direction, Iterate, ScaledProblem, Solution, SolverOptions};

const SINGULAR_UPDATE_TOL: f64 = 1e-14;
const DEBUG_INVERSE_TOL: f64 = 1e-6;
const DEBUG_D_TOL: f64 = 1e-12;

/// Indices refreshed in one iteration, one list per multiplier family.
/// The lists may overlap.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IndexSets {
    pub i_gamma: Vec<usize>,
    pub i_theta: Vec<usize>,
    pub i_phi: Vec<usize>,
    pub i_psi: Vec<usize>,
}

impl IndexSets {
    /// Sorted union of the four lists without duplicates.
    pub fn union(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self
            .i_gamma
            .iter()
            .chain(&self.i_theta)
            .chain(&self.i_phi)
            .chain(&self.i_psi)
            .copied()
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn is_empty(&self) -> bool {
        self.i_gamma.is_empty() && self.i_theta.is_empty() && self.i_phi.is_empty() && self.i_psi.is_empty()
    }
}

/// Number of rank-1 updates performed at each iteration.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RankOneLog {
    pub per_iter: Vec<u64>,
    pub total: u64,
}

impl RankOneLog {
    pub fn from_counts(per_iter: Vec<u64>) -> Self {
        let total = per_iter.iter().sum();
        Self { per_iter, total }
    }
}

#[derive(Debug, Clone)]
pub struct ApproxState {
    pub gamma_t: Vec<f64>,
    pub theta_t: Vec<f64>,
    pub phi_t: Vec<f64>,
    pub psi_t: Vec<f64>,
    pub d: Vec<f64>,
    /// `(2λH̃ + diag(d))⁻¹`.
    pub m: DenseMatrix,
}

fn outside_band(tilde: f64, current: f64, delta: f64) -> bool {
    let r = tilde / current;
    r < 1.0 / (1.0 + delta) || r > 1.0 + delta
}

fn band_factor(tilde: f64, current: f64) -> f64 {
    let r = tilde / current;
    r.max(1.0 / r)
}

impl ApproxState {
    /// Copies the iterate into the lagged state and inverts `B` once.
    pub fn init(it: &Iterate, sp: &ScaledProblem) -> Result<Self> {
        let d: Vec<f64> = (0..it.n())
            .map(|i| it.gamma[i] / it.phi[i] + it.theta[i] / it.psi[i])
            .collect();
        let m = Self::invert(sp, &d)?;
        Ok(Self {
            gamma_t: it.gamma.clone(),
            theta_t: it.theta.clone(),
            phi_t: it.phi.clone(),
            psi_t: it.psi.clone(),
            d,
            m,
        })
    }

    fn invert(sp: &ScaledProblem, d: &[f64]) -> Result<DenseMatrix> {
        let mut b = sp.two_lam_htilde.clone();
        b.add_diag(d);
        Ok(spd_inverse(&b)?)
    }

    /// Re-inverts `M` from the current `d`.
    pub fn reinvert(&mut self, sp: &ScaledProblem) -> Result<()> {
        self.m = Self::invert(sp, &self.d)?;
        Ok(())
    }

    /// Refreshes every lagged entry that left the band and reports which
    /// indices moved.
    pub fn refresh_tildes(&mut self, it: &Iterate, delta: f64) -> IndexSets {
        let mut sets = IndexSets::default();
        for i in 0..it.n() {
            if outside_band(self.gamma_t[i], it.gamma[i], delta) {
                self.gamma_t[i] = it.gamma[i];
                sets.i_gamma.push(i);
            }
            if outside_band(self.theta_t[i], it.theta[i], delta) {
                self.theta_t[i] = it.theta[i];
                sets.i_theta.push(i);
            }
            // The published procedure assigns γ̃ᵢ in this branch; the
            // definition of the φ family makes clear φ̃ᵢ is meant.
            if outside_band(self.phi_t[i], it.phi[i], delta) {
                self.phi_t[i] = it.phi[i];
                sets.i_phi.push(i);
            }
            if outside_band(self.psi_t[i], it.psi[i], delta) {
                self.psi_t[i] = it.psi[i];
                sets.i_psi.push(i);
            }
        }
        sets
    }

    /// Largest `max(t/c, c/t)` over all lagged/current pairs.
    pub fn ratio_band(&self, it: &Iterate) -> f64 {
        let mut worst: f64 = 1.0;
        for i in 0..it.n() {
            worst = worst
                .max(band_factor(self.gamma_t[i], it.gamma[i]))
                .max(band_factor(self.theta_t[i], it.theta[i]))
                .max(band_factor(self.phi_t[i], it.phi[i]))
                .max(band_factor(self.psi_t[i], it.psi[i]));
        }
        worst
    }

    /// One Sherman–Morrison update per unique index in `sets`, ascending.
    /// Returns the number of updates.
    pub fn apply_rank1(&mut self, sets: &IndexSets) -> Result<u64> {
        let union = sets.union();
        let n = self.d.len();
        let mut col = vec![0.0; n];
        for &i in &union {
            let target = self.gamma_t[i] / self.phi_t[i] + self.theta_t[i] / self.psi_t[i];
            let bump = target - self.d[i];
            let denominator = 1.0 + bump * self.m[(i, i)];
            if denominator <= SINGULAR_UPDATE_TOL {
                return Err(Error::SingularUpdate { index: i, denominator });
            }
            // M is symmetric, so column i is row i.
            col.copy_from_slice(self.m.row(i));
            rank1_symmetric_update(&mut self.m, -bump / denominator, &col);
            self.d[i] = target;
        }
        Ok(union.len() as u64)
    }

    /// Approximated Newton direction: `Δz = M·r` followed by the
    /// closed-form multiplier and slack steps.
    pub fn approx_direction(&self, it: &Iterate) -> Direction {
        let n = it.n();
        let tau = it.tau;
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            rhs[i] = tau / self.psi_t[i] - tau / self.phi_t[i] + it.gamma[i] * it.phi[i] / self.phi_t[i]
                - it.theta[i] * it.psi[i] / self.psi_t[i];
        }
        let mut dz = vec![0.0; n];
        linalg::matvec_into(&self.m, &rhs, &mut dz);
        let mut dgamma = vec![0.0; n];
        let mut dtheta = vec![0.0; n];
        for i in 0..n {
            let (gp, tp) = (it.gamma[i] * it.phi[i], it.theta[i] * it.psi[i]);
            dgamma[i] = self.gamma_t[i] / self.phi_t[i] * dz[i] + (tau - gp) / self.phi_t[i];
            dtheta[i] = -self.theta_t[i] / self.psi_t[i] * dz[i] + (tau - tp) / self.psi_t[i];
        }
        Direction {
            dphi: dz.iter().map(|v| -v).collect(),
            dpsi: dz.clone(),
            dz,
            dgamma,
            dtheta,
        }
    }

    /// `‖M·(2λH̃ + diag(d)) − I‖∞` (max entry). O(n³); debugging only.
    pub fn inverse_residual(&self, sp: &ScaledProblem) -> f64 {
        let mut b = sp.two_lam_htilde.clone();
        b.add_diag(&self.d);
        let prod = self.m.matmul(&b).expect("square matrices of equal size");
        prod.sub(&DenseMatrix::identity(self.d.len()))
            .expect("same shape")
            .max_abs()
    }

    /// Largest gap between the incrementally kept `d` and a fresh recompute.
    pub fn d_drift(&self) -> f64 {
        (0..self.d.len())
            .map(|i| (self.d[i] - (self.gamma_t[i] / self.phi_t[i] + self.theta_t[i] / self.psi_t[i])).abs())
            .fold(0.0, f64::max)
    }
}

struct ApproxStep {
    state: ApproxState,
    delta: f64,
    debug_checks: bool,
    reinvert_every: Option<u64>,
}

impl NewtonStep for ApproxStep {
    fn step(&mut self, it: &Iterate, sp: &ScaledProblem, k: u64) -> Result<Step> {
        let sets = self.state.refresh_tildes(it, self.delta);
        let rank1 = self.state.apply_rank1(&sets)?;
        if let Some(every) = self.reinvert_every {
            if every > 0 && k % every == 0 {
                self.state.reinvert(sp)?;
            }
        }
        if self.debug_checks {
            let drift = self.state.d_drift();
            if drift > DEBUG_D_TOL * self.state.d.iter().fold(1.0f64, |a, v| a.max(v.abs())) {
                warn!("iteration {k}: incremental d drifted by {drift:e}");
            }
            let res = self.state.inverse_residual(sp);
            if res > DEBUG_INVERSE_TOL {
                warn!("iteration {k}: ‖M·B − I‖ = {res:e}");
            }
        }
        let ratio_band = self.state.ratio_band(it);
        Ok(Step {
            direction: self.state.approx_direction(it),
            rank1,
            ratio_band,
        })
    }
}

/// Solves `p` with the approximated-Newton algorithm in exactly the
/// certified number of iterations (unless `opts.early_stop`).
pub fn solve_approx(p: &BoxQP, opts: &SolverOptions) -> Result<Solution> {
    solve_approx_with_iterate(p, opts).map(|(s, _)| s)
}

/// Like [`solve_approx`] but also returns the final iterate.
pub fn solve_approx_with_iterate(p: &BoxQP, opts: &SolverOptions) -> Result<(Solution, Option<Iterate>)> {
    let Some(sp) = prepare(p, opts)? else {
        return Ok((Solution::zero(Algorithm::Approx, p.n(), opts.record_trace), None));
    };
    let cert = certify(p.n(), opts.epsilon, Algorithm::Approx, opts.alpha, opts.delta)?;
    let it = sp.initialize();
    let mut stepper = ApproxStep {
        state: ApproxState::init(&it, &sp)?,
        delta: opts.delta,
        debug_checks: opts.debug_checks,
        reinvert_every: opts.reinvert_every,
    };
    let (sol, it) = ipm::run(&sp, it, cert, opts, &mut stepper)?;
    Ok((sol, Some(it)))
}
