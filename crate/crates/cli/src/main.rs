use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use certiqp::apps::{afti16_setup, run_rkf_scenario, simulate_closed_loop, RkfScenario};
use certiqp::harness::{audit_solve, timing_experiment, trace_experiment, write_timing_csv, AuditReport};
use certiqp::io::{
    read_json_file, write_iteration_csv, write_mpc_csv, write_rkf_csv, BoxQpFile, IoError, LassoFile, MpcScenario,
    StrictQpFile, SvmFile,
};
use certiqp::transforms::{l1_penalty_to_boxqp, lasso_kkt_violation, lasso_to_boxqp, svm_to_boxqp, StrictQP};
use certiqp::{certify, Algorithm, BoxQP, Solution, SolverOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "certiqp", version, about = "Box-QP solvers with execution-time certificates")]
struct Cli {
    #[command(flatten)]
    opts: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value_t = AlgoArg::Approx, global = true)]
    algorithm: AlgoArg,
    /// Target duality gap.
    #[arg(long, default_value_t = 1e-6, global = true)]
    eps: f64,
    #[arg(long, default_value_t = 0.3, global = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.15, global = true)]
    delta: f64,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Write the per-iteration trace as CSV.
    #[arg(long, value_name = "PATH", global = true)]
    trace: Option<PathBuf>,
    /// Check every iteration against the convergence invariants.
    #[arg(long, global = true)]
    audit: bool,
    /// Stop as soon as the gap reaches `--eps` instead of running the certified count.
    #[arg(long, global = true)]
    early_stop: bool,
    #[arg(long, default_value_t = 1, global = true)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Exact,
    Approx,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Exact => Algorithm::Exact,
            AlgoArg::Approx => Algorithm::Approx,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a Box-QP file `{"H", "h", "l"?, "u"?}`.
    Solve { input: PathBuf },
    /// Print the iteration and rank-1 certificate for dimension `n`.
    Certify {
        #[arg(long)]
        n: usize,
    },
    /// Solve a strictly convex QP `{"Q", "q", "G", "g", "rho"}` via the ℓ1 penalty.
    Qp { input: PathBuf },
    /// Solve a Lasso problem `{"A", "b", "lambda"}`.
    Lasso { input: PathBuf },
    /// Train a soft-margin SVM `{"X" | "gram", "y", "rho", "kernel"?}`.
    Svm { input: PathBuf },
    /// Run a closed-loop demo and write its trajectory as CSV.
    Demo {
        #[arg(value_enum)]
        which: DemoKind,
        /// Scenario JSON overriding the defaults.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// CSV destination (stdout when omitted).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Median wall time of both algorithms on random problems.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [100, 200, 300, 500])]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Per-iteration gap and rank-1 counts on random problems.
    Trace {
        #[arg(long, value_delimiter = ',', default_values_t = [100, 200])]
        ns: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-6, 1e-8])]
        epsilons: Vec<f64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoKind {
    #[value(name = "mpc-afti16")]
    MpcAfti16,
    #[value(name = "rkf-threetank")]
    RkfThreetank,
}

#[derive(Debug)]
enum Failure {
    /// The reader of stdout went away.
    Closed,
    Input(String),
    Numeric(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        if e.is_broken_pipe() {
            return Failure::Closed;
        }
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

impl From<certiqp::Error> for Failure {
    fn from(e: certiqp::Error) -> Self {
        IoError::from(e).into()
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl Common {
    fn solver_options(&self) -> SolverOptions {
        let mut o = SolverOptions::default().with_epsilon(self.eps);
        o.alpha = self.alpha;
        o.delta = self.delta;
        o.early_stop = self.early_stop;
        o.record_trace = self.trace.is_some();
        o
    }

    fn algorithm(&self) -> Algorithm {
        self.algorithm.into()
    }
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn print_json(v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("serializable");
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn audit_summary(r: &AuditReport) -> Value {
    json!({
        "passed": r.passed(),
        "iterations": r.rows.len(),
        "failures": r.failures(),
        "failed_invariants": r.failed_invariants(),
        "worst": r.worst,
        "rank1_total": r.rank1_total,
        "rank1_bound": r.rank1_bound,
    })
}

/// Solves `p`, writes the trace if requested, and returns the solution with
/// its audit summary when `--audit` is set.
fn run_solver(p: &BoxQP, c: &Common) -> Result<(Solution, Option<Value>), Failure> {
    let opts = c.solver_options();
    let (sol, audit) = if c.audit {
        let (sol, report) = audit_solve(p, c.algorithm(), &opts)?;
        if !report.passed() {
            log::warn!("audit failed: {:?}", report.failed_invariants());
        }
        (sol, Some(audit_summary(&report)))
    } else {
        (certiqp::solve(p, c.algorithm(), &opts)?, None)
    };
    if let (Some(path), Some(trace)) = (&c.trace, &sol.trace) {
        write_iteration_csv(trace, File::create(path)?)?;
    }
    log::info!(
        "{} solve: n={} iterations={} gap={:e}",
        sol.algorithm,
        p.n(),
        sol.iterations_run,
        sol.duality_gap
    );
    Ok((sol, audit))
}

fn solver_stats(sol: &Solution, audit: Option<Value>) -> Value {
    let mut v = json!({
        "algorithm": sol.algorithm,
        "duality_gap": sol.duality_gap,
        "iterations": sol.iterations_run,
        "rank1": sol.rank1_used,
        "certificate": sol.certificate,
    });
    if let Some(a) = audit {
        v["audit"] = a;
    }
    v
}

fn cmd_solve(input: &Path, c: &Common) -> Result<(), Failure> {
    let file: BoxQpFile = read_json_file(input)?;
    let (p, rec) = file.into_problem()?;
    let (sol, audit) = run_solver(&p, c)?;
    let mut v = solver_stats(&sol, audit);
    v["z"] = json!(sol.z_star);
    if let Some(rec) = rec {
        v["y"] = json!(rec.recover(&sol.z_star));
    }
    print_json(&v)
}

fn cmd_certify(n: usize, c: &Common) -> Result<(), Failure> {
    let cert = certify(n, c.eps, c.algorithm(), c.alpha, c.delta).map_err(|e| Failure::Input(e.to_string()))?;
    print_json(&serde_json::to_value(cert).expect("serializable"))
}

fn cmd_qp(input: &Path, c: &Common) -> Result<(), Failure> {
    let qp: StrictQP = read_json_file::<StrictQpFile>(input)?.into();
    let (p, rec) = l1_penalty_to_boxqp(&qp)?;
    let (sol, audit) = run_solver(&p, c)?;
    let y = rec.recover(&sol.z_star);
    let mut v = solver_stats(&sol, audit);
    v["y"] = json!(y);
    v["objective"] = json!(qp.penalized_objective(&y));
    v["max_violation"] = json!(qp.max_violation(&y));
    print_json(&v)
}

fn cmd_lasso(input: &Path, c: &Common) -> Result<(), Failure> {
    let lasso = read_json_file::<LassoFile>(input)?.into_problem()?;
    let (p, rec) = lasso_to_boxqp(&lasso)?;
    let (sol, audit) = run_solver(&p, c)?;
    let x = rec.recover(&sol.z_star);
    let mut v = solver_stats(&sol, audit);
    v["objective"] = json!(lasso.objective(&x));
    v["kkt_violation"] = json!(lasso_kkt_violation(&lasso, &x, 1e-4));
    v["lambda_max"] = json!(lasso.lambda_max());
    v["x"] = json!(x);
    print_json(&v)
}

fn cmd_svm(input: &Path, c: &Common) -> Result<(), Failure> {
    let svm = read_json_file::<SvmFile>(input)?.into_problem()?;
    let (p, rec) = svm_to_boxqp(&svm)?;
    let (sol, audit) = run_solver(&p, c)?;
    let model = rec.recover(&sol.z_star);
    let m = svm.labels.len();
    let correct = (0..m)
        .filter(|&i| model.decision_from_gram(&svm.gram, i) * svm.labels[i] > 0.0)
        .count();
    let mut v = solver_stats(&sol, audit);
    v["duals"] = json!(model.duals);
    v["weights"] = json!(model.linear_weights());
    v["training_accuracy"] = json!(correct as f64 / m as f64);
    print_json(&v)
}

fn cmd_demo(which: DemoKind, scenario: Option<&Path>, out: Option<&Path>, c: &Common) -> Result<(), Failure> {
    let mut opts = c.solver_options();
    opts.record_trace = false;
    match which {
        DemoKind::MpcAfti16 => {
            let sc: MpcScenario = match scenario {
                Some(p) => read_json_file(p)?,
                None => MpcScenario::default(),
            };
            let (model, cfg) = afti16_setup();
            if sc.x0.len() != model.nx() {
                return Err(Failure::Input(format!("x0 has length {}, expected {}", sc.x0.len(), model.nx())));
            }
            let pitch = sc.pitch_ref;
            let run = simulate_closed_loop(&model, &cfg, &sc.x0, |_| vec![0.0, pitch], sc.steps, c.algorithm(), &opts)?;
            write_mpc_csv(&run, output(out)?)?;
            if let Some(last) = run.last() {
                log::info!("final y = {:?}, u = {:?}", last.y, last.u);
            }
        }
        DemoKind::RkfThreetank => {
            let sc: RkfScenario = match scenario {
                Some(p) => read_json_file(p)?,
                None => RkfScenario {
                    seed: c.seed,
                    ..RkfScenario::default()
                },
            };
            let run = run_rkf_scenario(&sc, c.algorithm(), &opts)?;
            write_rkf_csv(&run, output(out)?)?;
            log::info!("rms kf = {:?}, rms rkf = {:?}", run.rms_kf, run.rms_rkf);
        }
    }
    Ok(())
}

fn cmd_bench(ns: &[usize], reps: usize, out: Option<&Path>, c: &Common) -> Result<(), Failure> {
    if reps == 0 {
        return Err(Failure::Input("--reps must be at least 1".into()));
    }
    let rows = timing_experiment(ns, reps, c.seed)?;
    write_timing_csv(&rows, output(out)?).map_err(|e| Failure::Numeric(e.to_string()))?;
    Ok(())
}

fn cmd_trace(ns: &[usize], epsilons: &[f64], out: Option<&Path>, c: &Common) -> Result<(), Failure> {
    let cells = trace_experiment(ns, epsilons, c.seed, c.jobs.max(1), output(out)?)?;
    for cell in &cells {
        log::info!("{}: {} iterations, {} rank-1 updates", cell.label(), cell.records.len(), cell.rank1_total());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = &cli.opts;
    match &cli.command {
        Command::Solve { input } => cmd_solve(input, c),
        Command::Certify { n } => cmd_certify(*n, c),
        Command::Qp { input } => cmd_qp(input, c),
        Command::Lasso { input } => cmd_lasso(input, c),
        Command::Svm { input } => cmd_svm(input, c),
        Command::Demo { which, scenario, output } => cmd_demo(*which, scenario.as_deref(), output.as_deref(), c),
        Command::Bench { ns, reps, output } => cmd_bench(ns, *reps, output.as_deref(), c),
        Command::Trace { ns, epsilons, output } => cmd_trace(ns, epsilons, output.as_deref(), c),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CERTIQP_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) | Err(Failure::Closed) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
