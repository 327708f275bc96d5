//! Random problems, brute-force oracles, per-iteration audits, and the
//! experiment drivers behind the convergence and timing studies.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::certificate::{certify, Algorithm, Certificate};
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::problem::{BoxQP, IterationRecord, Solution, SolverOptions};
use crate::transforms::LassoProblem;

/// Largest dimension the 3ⁿ enumeration accepts.
pub const ORACLE_MAX_N: usize = 10;

/// `H = SᵀS/n` with `S` a `⌈density·n⌉ × n` standard normal matrix and `h`
/// standard normal. `density < 1` gives a singular `H`.
pub fn random_boxqp(n: usize, seed: u64, density: f64) -> BoxQP {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = (density.clamp(0.0, 1.0) * n as f64).ceil() as usize;
    let s = DenseMatrix::from_fn(k, n, |_, _| StandardNormal.sample(&mut rng));
    let hess = linalg::gram(&s).scaled(1.0 / n as f64);
    let lin = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    BoxQP::new(hess, lin).expect("generated data is finite and square")
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// `None` when a pivot falls below `tol`.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= tol {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Exhaustive KKT enumeration over every assignment of each coordinate to
/// {lower, free, upper}. Returns the lowest-objective KKT point.
///
/// Free blocks that are numerically singular are skipped: for PSD `H` some
/// optimum always has a nonsingular free block, because moving along a
/// null direction of `H_FF` leaves the objective unchanged until a bound
/// becomes active.
pub fn oracle_active_set(p: &BoxQP) -> Result<Vec<f64>> {
    let n = p.n();
    if n > ORACLE_MAX_N {
        return Err(Error::Intractable { n, limit: ORACLE_MAX_N });
    }
    let h = p.hess();
    let lin = p.lin();
    let scale = 1.0 + h.max_abs() + linalg::norm_inf(lin);
    let kkt_tol = 1e-9 * scale;
    let pivot_tol = 1e-12 * scale;

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut state = vec![0u8; n]; // 0 lower, 1 free, 2 upper
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 1).collect();
        let mut z: Vec<f64> = state.iter().map(|&s| if s == 2 { 1.0 } else { -1.0 }).collect();
        if !free.is_empty() {
            let a: Vec<Vec<f64>> = free.iter().map(|&i| free.iter().map(|&j| h[(i, j)]).collect()).collect();
            let rhs: Vec<f64> = free
                .iter()
                .map(|&i| {
                    let bound: f64 = (0..n).filter(|&j| state[j] != 1).map(|j| h[(i, j)] * z[j]).sum();
                    -(lin[i] + bound)
                })
                .collect();
            let Some(zf) = gauss_solve(a, rhs, pivot_tol) else {
                continue;
            };
            for (k, &i) in free.iter().enumerate() {
                z[i] = zf[k];
            }
        }
        let g = linalg::matvec(h, &z)?;
        let consistent = (0..n).all(|i| {
            let gi = g[i] + lin[i];
            match state[i] {
                0 => gi >= -kkt_tol,
                2 => gi <= kkt_tol,
                _ => z[i].abs() <= 1.0 + 1e-9 && gi.abs() <= kkt_tol,
            }
        });
        if !consistent {
            continue;
        }
        let obj = p.objective(&z);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, z));
        }
    }
    Ok(best.expect("a bounded convex QP has a KKT point").1)
}

/// `‖AᵀA‖₂` by power iteration from the all-ones vector.
fn power_norm(gram: &DenseMatrix) -> f64 {
    let n = gram.rows();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut est = 0.0;
    for _ in 0..1000 {
        let w = linalg::matvec(gram, &v).expect("square");
        let norm = linalg::norm2(&w);
        if norm == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if (norm - est).abs() <= 1e-12 * norm {
            est = norm;
            break;
        }
        est = norm;
    }
    est
}

#[derive(Debug, Clone, PartialEq)]
pub struct IstaRun {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Objective after each iteration, when requested.
    pub objectives: Vec<f64>,
}

/// Proximal gradient for the Lasso with step `1/L`, `L ≈ ‖AᵀA‖₂`.
/// Stops once the gradient-map norm `‖x⁺ − x‖∞ / step` drops to `tol`.
pub fn oracle_ista_run(p: &LassoProblem, iters: usize, tol: f64, record: bool) -> IstaRun {
    let gram = p.gram();
    let atb = linalg::matvec_transpose(&p.a, &p.b).expect("shape checked");
    // a slightly inflated estimate keeps the step below 1/‖AᵀA‖₂
    let lip = power_norm(&gram) * (1.0 + 1e-6);
    let n = p.n();
    let mut x = vec![0.0; n];
    let mut objectives = Vec::new();
    if lip == 0.0 {
        return IstaRun {
            x,
            iterations: 0,
            objectives,
        };
    }
    let step = 1.0 / lip;
    let thresh = p.lambda * step;
    let mut k = 0;
    while k < iters {
        k += 1;
        let gx = linalg::matvec(&gram, &x).expect("square");
        let mut change: f64 = 0.0;
        for i in 0..n {
            let v = x[i] - step * (gx[i] - atb[i]);
            let next = v.signum() * (v.abs() - thresh).max(0.0);
            change = change.max((next - x[i]).abs());
            x[i] = next;
        }
        if record {
            objectives.push(p.objective(&x));
        }
        if change / step <= tol {
            break;
        }
    }
    IstaRun {
        x,
        iterations: k,
        objectives,
    }
}

pub fn oracle_ista(p: &LassoProblem, iters: usize, tol: f64) -> Vec<f64> {
    oracle_ista_run(p, iters, tol, false).x
}

/// Pass/fail of every checked invariant at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuditRow {
    pub k: u64,
    pub positivity: bool,
    pub neighborhood: bool,
    pub sandwich: bool,
    pub ratio_band: bool,
    pub curvature: bool,
    pub step_bound: bool,
    pub rank1_budget: bool,
}

impl AuditRow {
    pub fn passed(&self) -> bool {
        self.positivity
            && self.neighborhood
            && self.sandwich
            && self.ratio_band
            && self.curvature
            && self.step_bound
            && self.rank1_budget
    }
}

/// Worst value seen for each invariant over the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditMargins {
    pub min_entry: f64,
    /// `max ‖x∘s − τe‖ / (ατ)`; at most 1 when clean.
    pub neighborhood: f64,
    /// Largest relative excursion outside `(2n ± α√(2n))τ`; at most 0 when clean.
    pub sandwich: f64,
    pub ratio_band: f64,
    pub curvature: f64,
    /// `max ‖Δx/x‖∞ / η`.
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub algorithm: Algorithm,
    pub n: usize,
    pub rows: Vec<AuditRow>,
    pub worst: AuditMargins,
    pub rank1_total: u64,
    pub rank1_bound: Option<u64>,
    pub final_gap: f64,
    pub certificate: Option<Certificate>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(AuditRow::passed)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.passed()).count()
    }

    /// Names of invariants that failed at least once.
    pub fn failed_invariants(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let checks: [(&str, fn(&AuditRow) -> bool); 7] = [
            ("positivity", |r| r.positivity),
            ("neighborhood", |r| r.neighborhood),
            ("sandwich", |r| r.sandwich),
            ("ratio_band", |r| r.ratio_band),
            ("curvature", |r| r.curvature),
            ("step_bound", |r| r.step_bound),
            ("rank1_budget", |r| r.rank1_budget),
        ];
        for (name, f) in checks {
            if self.rows.iter().any(|r| !f(r)) {
                out.push(name);
            }
        }
        out
    }
}

const NEIGHBORHOOD_SLACK: f64 = 1e-8;
const SANDWICH_SLACK: f64 = 1e-9;
const CURVATURE_FLOOR: f64 = -1e-12;
const STEP_SLACK: f64 = 1e-8;
const BAND_SLACK: f64 = 1e-12;

/// Checks every iteration of a traced solve against the convergence theory.
pub fn audit_trace(sol: &Solution) -> AuditReport {
    let cert = sol.certificate.clone();
    let records: &[IterationRecord] = sol.trace.as_ref().map(|t| t.records.as_slice()).unwrap_or(&[]);
    let mut worst = AuditMargins {
        min_entry: f64::INFINITY,
        neighborhood: 0.0,
        sandwich: f64::NEG_INFINITY,
        ratio_band: 1.0,
        curvature: f64::INFINITY,
        step: 0.0,
    };
    let mut rows = Vec::with_capacity(records.len());
    let n = sol.z_star.len();
    if let Some(c) = &cert {
        let consts = &c.constants;
        let alpha = consts.alpha();
        let eta = consts.eta();
        let band = 1.0 + consts.delta();
        let two_n = 2.0 * n as f64;
        let spread = alpha * two_n.sqrt();
        for r in records {
            // the record already holds ‖x∘s − τe‖/τ
            let nb = r.neighborhood_norm / alpha;
            let lo = (two_n - spread) * r.tau;
            let hi = (two_n + spread) * r.tau;
            let excursion = ((lo - r.duality_gap) / lo).max((r.duality_gap - hi) / hi);
            let step = r.relative_step / eta;
            worst.min_entry = worst.min_entry.min(r.min_entry);
            worst.neighborhood = worst.neighborhood.max(nb);
            worst.sandwich = worst.sandwich.max(excursion);
            worst.ratio_band = worst.ratio_band.max(r.ratio_band);
            worst.curvature = worst.curvature.min(r.curvature);
            worst.step = worst.step.max(step);
            rows.push(AuditRow {
                k: r.k,
                positivity: r.min_entry > 0.0,
                neighborhood: nb <= 1.0 + NEIGHBORHOOD_SLACK,
                sandwich: excursion <= SANDWICH_SLACK,
                ratio_band: r.ratio_band <= band * (1.0 + BAND_SLACK),
                curvature: r.curvature >= CURVATURE_FLOOR,
                step_bound: r.relative_step <= eta + STEP_SLACK,
                rank1_budget: c.n_rank1_bound.is_none_or(|b| r.cumulative_rank1 <= b),
            });
        }
    }
    AuditReport {
        algorithm: sol.algorithm,
        n,
        rows,
        worst,
        rank1_total: sol.rank1_used,
        rank1_bound: cert.as_ref().and_then(|c| c.n_rank1_bound),
        final_gap: sol.duality_gap,
        certificate: cert,
    }
}

/// Solves with tracing forced on and audits the run.
pub fn audit_solve(p: &BoxQP, algorithm: Algorithm, opts: &SolverOptions) -> Result<(Solution, AuditReport)> {
    let opts = SolverOptions {
        record_trace: true,
        ..opts.clone()
    };
    let sol = crate::solve(p, algorithm, &opts)?;
    let report = audit_trace(&sol);
    Ok((sol, report))
}

/// One convergence run of the approximated solver.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceCell {
    pub n: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub certificate: Certificate,
    pub records: Vec<IterationRecord>,
}

impl TraceCell {
    pub fn label(&self) -> String {
        format!("n{}_eps{:e}", self.n, self.epsilon)
    }

    /// Duality gap after iteration `k` (1-based).
    pub fn gap_at(&self, k: u64) -> Option<f64> {
        let idx = usize::try_from(k).ok()?.checked_sub(1)?;
        self.records.get(idx).map(|r| r.duality_gap)
    }

    pub fn rank1_total(&self) -> u64 {
        self.records.last().map_or(0, |r| r.cumulative_rank1)
    }

    pub fn gap_strictly_decreasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].duality_gap < w[0].duality_gap)
    }
}

#[derive(Debug, Serialize)]
struct TraceRow<'a> {
    experiment: &'a str,
    n: usize,
    epsilon: f64,
    k: u64,
    tau: f64,
    gap: f64,
    rank1_cum: u64,
    n_iter_bound: u64,
    rank1_bound: u64,
}

/// Seed of the problem used for size `n` in the trace experiment; the same
/// problem is reused across tolerances.
pub fn trace_seed(seed: u64, n: usize) -> u64 {
    seed.wrapping_add(n as u64)
}

pub fn run_trace_cell(n: usize, epsilon: f64, seed: u64) -> Result<TraceCell> {
    let p = random_boxqp(n, trace_seed(seed, n), 1.0);
    let opts = SolverOptions::default().with_epsilon(epsilon).with_trace();
    let sol = crate::solve(&p, Algorithm::Approx, &opts)?;
    let certificate = sol.certificate.clone().unwrap_or(certify(
        n,
        epsilon,
        Algorithm::Approx,
        opts.alpha,
        opts.delta,
    )?);
    Ok(TraceCell {
        n,
        epsilon,
        seed: trace_seed(seed, n),
        certificate,
        records: sol.trace.map(|t| t.records).unwrap_or_default(),
    })
}

/// Runs every `(n, ε)` cell, spread over `jobs` threads, in input order.
pub fn run_trace_cells(ns: &[usize], epsilons: &[f64], seed: u64, jobs: usize) -> Result<Vec<TraceCell>> {
    let cells: Vec<(usize, f64)> = ns.iter().flat_map(|&n| epsilons.iter().map(move |&e| (n, e))).collect();
    let jobs = jobs.max(1).min(cells.len().max(1));
    let mut out: Vec<Option<Result<TraceCell>>> = vec![None; cells.len()];
    std::thread::scope(|scope| {
        for (chunk_idx, chunk) in out.chunks_mut(cells.len().div_ceil(jobs).max(1)).enumerate() {
            let cells = &cells;
            let start = chunk_idx * cells.len().div_ceil(jobs).max(1);
            scope.spawn(move || {
                for (off, slot) in chunk.iter_mut().enumerate() {
                    let (n, e) = cells[start + off];
                    *slot = Some(run_trace_cell(n, e, seed));
                }
            });
        }
    });
    out.into_iter().map(|r| r.expect("every slot filled")).collect()
}

/// Writes the per-iteration trace CSV for the given cells.
pub fn write_trace_csv<W: Write>(cells: &[TraceCell], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for cell in cells {
        let label = cell.label();
        for r in &cell.records {
            w.serialize(TraceRow {
                experiment: &label,
                n: cell.n,
                epsilon: cell.epsilon,
                k: r.k,
                tau: r.tau,
                gap: r.duality_gap,
                rank1_cum: r.cumulative_rank1,
                n_iter_bound: cell.certificate.n_iter,
                rank1_bound: cell.certificate.n_rank1_bound.unwrap_or(0),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Convergence study: gap and cumulative rank-1 count per iteration with
/// the certified bounds alongside.
pub fn trace_experiment<W: Write>(
    ns: &[usize],
    epsilons: &[f64],
    seed: u64,
    jobs: usize,
    out: W,
) -> Result<Vec<TraceCell>> {
    let cells = run_trace_cells(ns, epsilons, seed, jobs)?;
    write_trace_csv(&cells, out).map_err(|e| Error::Shape(format!("writing trace CSV: {e}")))?;
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub n: usize,
    pub algo: Algorithm,
    pub median_seconds: f64,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Median wall time of both solvers over `reps` problems per size. Each
/// algorithm gets one untimed warmup solve per size.
pub fn timing_experiment(ns: &[usize], reps: usize, seed: u64) -> Result<Vec<TimingRow>> {
    let opts = SolverOptions::default();
    let mut rows = Vec::new();
    for &n in ns {
        let problems: Vec<BoxQP> = (0..reps.max(1))
            .map(|r| random_boxqp(n, seed.wrapping_add((n * 1000 + r) as u64), 1.0))
            .collect();
        for algo in [Algorithm::Exact, Algorithm::Approx] {
            crate::solve(&problems[0], algo, &opts)?;
            let mut times = Vec::with_capacity(problems.len());
            for p in &problems {
                let t = Instant::now();
                let sol = crate::solve(p, algo, &opts)?;
                times.push(t.elapsed().as_secs_f64());
                std::hint::black_box(sol);
            }
            rows.push(TimingRow {
                n,
                algo,
                median_seconds: median(&mut times),
            });
        }
    }
    Ok(rows)
}

pub fn write_timing_csv<W: Write>(rows: &[TimingRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
