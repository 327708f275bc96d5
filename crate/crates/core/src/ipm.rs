//! Fixed-count path-following loop shared by both solvers.

use log::debug;

use crate::approx::RankOneLog;
use crate::certificate::Certificate;
use crate::error::Result;
use crate::problem::{Direction, IterationRecord, IterationTrace, Iterate, ScaledProblem, Solution, SolverOptions};

pub(crate) struct Step {
    pub direction: Direction,
    pub rank1: u64,
    pub ratio_band: f64,
}

pub(crate) trait NewtonStep {
    /// Direction for iteration `k` (1-based) at the current iterate.
    fn step(&mut self, it: &Iterate, sp: &ScaledProblem, k: u64) -> Result<Step>;
}

pub(crate) fn run(
    sp: &ScaledProblem,
    mut it: Iterate,
    cert: Certificate,
    opts: &SolverOptions,
    stepper: &mut impl NewtonStep,
) -> Result<(Solution, Iterate)> {
    let tau_factor = cert.constants.tau_factor();
    let mut trace = opts.record_trace.then(|| IterationTrace {
        records: Vec::with_capacity(cert.n_iter as usize),
    });
    let mut per_iter = Vec::new();
    let mut rank1_total = 0u64;
    let mut k = 0u64;

    while k < cert.n_iter {
        k += 1;
        let step = stepper.step(&it, sp, k)?;
        rank1_total += step.rank1;
        per_iter.push(step.rank1);

        let (rel_x, rel_s) = if trace.is_some() {
            step.direction.relative_step(&it)
        } else {
            (f64::NAN, f64::NAN)
        };
        it.apply(&step.direction);
        it.tau *= tau_factor;
        if let Some(fault) = opts.tau_fault {
            if fault.at == k {
                it.tau *= fault.factor;
            }
        }

        let gap = it.duality_gap();
        if let Some(tr) = trace.as_mut() {
            let stationarity = if opts.debug_checks {
                sp.kkt_residuals(&it).stationarity
            } else {
                f64::NAN
            };
            tr.records.push(IterationRecord {
                k,
                tau: it.tau,
                duality_gap: gap,
                neighborhood_norm: it.neighborhood_norm(it.tau),
                cumulative_rank1: rank1_total,
                rank1_this_iter: step.rank1,
                min_entry: it.min_entry(),
                curvature: step.direction.curvature(),
                relative_step: rel_x.max(rel_s),
                ratio_band: step.ratio_band,
                stationarity,
            });
        }
        if opts.early_stop && gap <= opts.epsilon {
            debug!("early stop at iteration {k} with gap {gap:e}");
            break;
        }
    }

    let solution = Solution {
        algorithm: cert.algorithm,
        z_star: it.z.clone(),
        duality_gap: it.duality_gap(),
        iterations_run: k,
        rank1_used: rank1_total,
        certificate: Some(cert),
        trace,
        rank1_log: Some(RankOneLog::from_counts(per_iter)),
    };
    Ok((solution, it))
}
