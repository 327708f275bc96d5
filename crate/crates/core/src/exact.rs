//! Feasible path-following IPM with the exact Newton step: one fresh
//! Cholesky factorization of `2λH̃ + diag(γ/φ) + diag(θ/ψ)` per iteration.

use crate::certificate::{certify, Algorithm};
use crate::error::Result;
use crate::ipm::{self, NewtonStep, Step};
use crate::linalg::{cholesky_factor, DenseMatrix};
use crate::problem::{prepare, BoxQP, Direction, Iterate, ScaledProblem, Solution, SolverOptions};

/// Exact Newton direction at `it`, targeting the current `it.tau`.
pub fn exact_direction(it: &Iterate, sp: &ScaledProblem) -> Result<Direction> {
    let mut lhs = sp.two_lam_htilde.clone();
    exact_direction_with(it, &mut lhs)
}

fn exact_direction_with(it: &Iterate, lhs: &mut DenseMatrix) -> Result<Direction> {
    let n = it.n();
    let tau = it.tau;
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        lhs[(i, i)] += it.gamma[i] / it.phi[i] + it.theta[i] / it.psi[i];
        rhs[i] = tau / it.psi[i] - tau / it.phi[i] + it.gamma[i] - it.theta[i];
    }
    let factor = cholesky_factor(lhs)?;
    factor.solve_in_place(&mut rhs)?;
    let dz = rhs;
    let mut dgamma = vec![0.0; n];
    let mut dtheta = vec![0.0; n];
    for i in 0..n {
        dgamma[i] = it.gamma[i] / it.phi[i] * dz[i] + tau / it.phi[i] - it.gamma[i];
        dtheta[i] = -it.theta[i] / it.psi[i] * dz[i] + tau / it.psi[i] - it.theta[i];
    }
    Ok(Direction {
        dphi: dz.iter().map(|v| -v).collect(),
        dpsi: dz.clone(),
        dz,
        dgamma,
        dtheta,
    })
}

struct ExactStep {
    scratch: DenseMatrix,
}

impl NewtonStep for ExactStep {
    fn step(&mut self, it: &Iterate, sp: &ScaledProblem, _k: u64) -> Result<Step> {
        self.scratch
            .as_mut_slice()
            .copy_from_slice(sp.two_lam_htilde.as_slice());
        Ok(Step {
            direction: exact_direction_with(it, &mut self.scratch)?,
            rank1: 0,
            ratio_band: 1.0,
        })
    }
}

/// Solves `p` with the exact-Newton algorithm in exactly the certified
/// number of iterations (unless `opts.early_stop`).
pub fn solve_exact(p: &BoxQP, opts: &SolverOptions) -> Result<Solution> {
    solve_exact_with_iterate(p, opts).map(|(s, _)| s)
}

/// Like [`solve_exact`] but also returns the final iterate.
pub fn solve_exact_with_iterate(p: &BoxQP, opts: &SolverOptions) -> Result<(Solution, Option<Iterate>)> {
    let Some(sp) = prepare(p, opts)? else {
        return Ok((Solution::zero(Algorithm::Exact, p.n(), opts.record_trace), None));
    };
    let cert = certify(p.n(), opts.epsilon, Algorithm::Exact, opts.alpha, 0.0)?;
    let mut stepper = ExactStep {
        scratch: sp.two_lam_htilde.clone(),
    };
    let it = sp.initialize();
    let (mut sol, it) = ipm::run(&sp, it, cert, opts, &mut stepper)?;
    sol.rank1_log = None;
    Ok((sol, Some(it)))
}
