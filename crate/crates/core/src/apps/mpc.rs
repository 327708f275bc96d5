//! Condensed linear MPC for tracking with ℓ1-softened constraints.
//!
//! The decision vector stacks the input increments `Δu_0, …, Δu_{Np−1}`.
//! States are eliminated by forward recursion, so `x_{k+1} = c_k + S_k·Δu`
//! and `u_k = u_prev + T_k·Δu`.

use serde::{Deserialize, Serialize};

use super::lti::{zoh_discretize, LtiModel};
use crate::certificate::Algorithm;
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::problem::SolverOptions;
use crate::transforms::{l1_penalty_to_boxqp, StrictQP};

/// Per-step constraints `E_x x_{k+1} + E_u u_k + E_Δu Δu_k ≤ f`, each row
/// softened with penalty `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageConstraints {
    pub ex: DenseMatrix,
    pub eu: DenseMatrix,
    pub edu: DenseMatrix,
    pub f: Vec<f64>,
    pub rho: Vec<f64>,
}

impl StageConstraints {
    pub fn rows(&self) -> usize {
        self.f.len()
    }

    /// Upper/lower output and input bounds, two rows per bounded quantity.
    /// Outputs first, then inputs.
    pub fn output_input_box(
        model: &LtiModel,
        y_bounds: &[(f64, f64)],
        u_bounds: &[(f64, f64)],
        rho_out: f64,
        rho_in: f64,
    ) -> Self {
        let (nx, nu) = (model.nx(), model.nu());
        let rows = 2 * (y_bounds.len() + u_bounds.len());
        let mut ex = DenseMatrix::zeros(rows, nx);
        let mut eu = DenseMatrix::zeros(rows, nu);
        let mut f = Vec::with_capacity(rows);
        let mut rho = Vec::with_capacity(rows);
        let mut r = 0;
        for (i, &(lo, hi)) in y_bounds.iter().enumerate() {
            for (sign, bound) in [(1.0, hi), (-1.0, -lo)] {
                for c in 0..nx {
                    ex[(r, c)] = sign * model.c[(i, c)];
                }
                f.push(bound);
                rho.push(rho_out);
                r += 1;
            }
        }
        for (i, &(lo, hi)) in u_bounds.iter().enumerate() {
            for (sign, bound) in [(1.0, hi), (-1.0, -lo)] {
                eu[(r, i)] = sign;
                f.push(bound);
                rho.push(rho_in);
                r += 1;
            }
        }
        Self {
            ex,
            eu,
            edu: DenseMatrix::zeros(rows, nu),
            f,
            rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcConfig {
    pub horizon: usize,
    /// Diagonal of `W_y`.
    pub wy: Vec<f64>,
    /// Diagonal of `W_Δu`; must be positive.
    pub wdu: Vec<f64>,
    pub constraints: StageConstraints,
}

/// Condensed problem plus the constant the objective drops.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedMpc {
    pub qp: StrictQP,
    pub constant: f64,
}

fn check_dims(model: &LtiModel, cfg: &MpcConfig, x0: &[f64], u_prev: &[f64], r: &[f64]) -> Result<()> {
    let (nx, nu, ny) = (model.nx(), model.nu(), model.ny());
    let bad = |what: &str, got: usize, want: usize| Error::Shape(format!("{what} has length {got}, expected {want}"));
    if x0.len() != nx {
        return Err(bad("x0", x0.len(), nx));
    }
    if u_prev.len() != nu {
        return Err(bad("u_prev", u_prev.len(), nu));
    }
    if r.len() != ny {
        return Err(bad("reference", r.len(), ny));
    }
    if cfg.wy.len() != ny {
        return Err(bad("wy", cfg.wy.len(), ny));
    }
    if cfg.wdu.len() != nu {
        return Err(bad("wdu", cfg.wdu.len(), nu));
    }
    if cfg.wdu.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Shape("wdu must be positive".into()));
    }
    if cfg.horizon == 0 {
        return Err(Error::Shape("horizon must be at least 1".into()));
    }
    let k = &cfg.constraints;
    let nc = k.rows();
    if k.ex.rows() != nc || k.ex.cols() != nx || k.eu.rows() != nc || k.eu.cols() != nu {
        return Err(Error::Shape("constraint matrices do not match the model".into()));
    }
    if k.edu.rows() != nc || k.edu.cols() != nu || k.rho.len() != nc {
        return Err(Error::Shape("constraint matrices do not match the model".into()));
    }
    Ok(())
}

/// Eliminates the states and returns the strictly convex QP in `Δu`.
pub fn condense_mpc(model: &LtiModel, cfg: &MpcConfig, x0: &[f64], u_prev: &[f64], r: &[f64]) -> Result<CondensedMpc> {
    check_dims(model, cfg, x0, u_prev, r)?;
    let (nx, nu, ny) = (model.nx(), model.nu(), model.ny());
    let np = cfg.horizon;
    let nv = nu * np;
    let wy2: Vec<f64> = cfg.wy.iter().map(|w| w * w).collect();
    let cons = &cfg.constraints;
    let nc = cons.rows();

    let mut q_mat = DenseMatrix::zeros(nv, nv);
    for k in 0..nv {
        let w = cfg.wdu[k % nu];
        q_mat[(k, k)] = w * w;
    }
    let mut q = vec![0.0; nv];
    let mut constant = 0.0;
    let mut g_mat = DenseMatrix::zeros(nc * np, nv);
    let mut g = Vec::with_capacity(nc * np);

    // x_{k+1} = c + S·Δu, u_k = u_prev + T·Δu
    let mut c = x0.to_vec();
    let mut s = DenseMatrix::zeros(nx, nv);
    let mut t = DenseMatrix::zeros(nu, nv);
    for k in 0..np {
        for i in 0..nu {
            t[(i, k * nu + i)] = 1.0;
        }
        c = model.step(&c, u_prev);
        let mut s_next = model.a.matmul(&s)?;
        let bt = model.b.matmul(&t)?;
        s_next = s_next.add(&bt)?;
        s = s_next;

        // tracking term
        let cs = model.c.matmul(&s)?;
        let err: Vec<f64> = model.output(&c).iter().zip(r).map(|(y, r)| y - r).collect();
        for (i, e) in err.iter().enumerate() {
            constant += 0.5 * wy2[i] * e * e;
        }
        for a in 0..nv {
            for i in 0..ny {
                q[a] += cs[(i, a)] * wy2[i] * err[i];
            }
            for b in a..nv {
                let v: f64 = (0..ny).map(|i| cs[(i, a)] * wy2[i] * cs[(i, b)]).sum();
                q_mat[(a, b)] += v;
                if a != b {
                    q_mat[(b, a)] += v;
                }
            }
        }

        // constraint rows for this stage
        let exs = cons.ex.matmul(&s)?;
        let eut = cons.eu.matmul(&t)?;
        let exc = linalg::matvec(&cons.ex, &c)?;
        let euu = linalg::matvec(&cons.eu, u_prev)?;
        for row in 0..nc {
            let out = k * nc + row;
            for col in 0..nv {
                g_mat[(out, col)] = exs[(row, col)] + eut[(row, col)];
            }
            for i in 0..nu {
                g_mat[(out, k * nu + i)] += cons.edu[(row, i)];
            }
            g.push(cons.f[row] - exc[row] - euu[row]);
        }
    }
    let rho = (0..np).flat_map(|_| cons.rho.iter().copied()).collect();
    Ok(CondensedMpc {
        qp: StrictQP {
            q_mat,
            q,
            g_mat,
            g,
            rho,
        },
        constant,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MpcStep {
    pub u: Vec<f64>,
    pub delta_u: Vec<f64>,
    pub qp_dim: usize,
    pub duality_gap: f64,
    pub iterations: u64,
    pub rank1: u64,
}

/// Condense, soften, solve, recover, and apply the first increment.
pub fn mpc_step(
    model: &LtiModel,
    cfg: &MpcConfig,
    x0: &[f64],
    u_prev: &[f64],
    r: &[f64],
    algorithm: Algorithm,
    opts: &SolverOptions,
) -> Result<MpcStep> {
    let condensed = condense_mpc(model, cfg, x0, u_prev, r)?;
    let (qp, rec) = l1_penalty_to_boxqp(&condensed.qp)?;
    let sol = crate::solve(&qp, algorithm, opts)?;
    let delta_u = rec.recover(&sol.z_star);
    let u = u_prev.iter().zip(&delta_u).map(|(a, b)| a + b).collect();
    Ok(MpcStep {
        u,
        delta_u,
        qp_dim: qp.n(),
        duality_gap: sol.duality_gap,
        iterations: sol.iterations_run,
        rank1: sol.rank1_used,
    })
}

/// One closed-loop sample: state and output when the input is chosen, the
/// input applied, and solver statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopSample {
    pub t: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub qp_dim: usize,
    pub duality_gap: f64,
    pub iterations: u64,
    pub rank1: u64,
}

/// Runs the plant under MPC for `steps` samples starting from `u = 0`.
pub fn simulate_closed_loop(
    model: &LtiModel,
    cfg: &MpcConfig,
    x0: &[f64],
    reference: impl Fn(usize) -> Vec<f64>,
    steps: usize,
    algorithm: Algorithm,
    opts: &SolverOptions,
) -> Result<Vec<LoopSample>> {
    let mut x = x0.to_vec();
    let mut u = vec![0.0; model.nu()];
    let mut out = Vec::with_capacity(steps);
    for t in 0..steps {
        let r = reference(t);
        let step = mpc_step(model, cfg, &x, &u, &r, algorithm, opts)?;
        u = step.u.clone();
        out.push(LoopSample {
            t,
            y: model.output(&x),
            x: x.clone(),
            r,
            u: u.clone(),
            qp_dim: step.qp_dim,
            duality_gap: step.duality_gap,
            iterations: step.iterations,
            rank1: step.rank1,
        });
        x = model.step(&x, &u);
    }
    Ok(out)
}

pub const AFTI16_TS: f64 = 0.05;
pub const AFTI16_X0: [f64; 4] = [0.0, 5.0, 0.0, 0.0];
/// Pitch-angle reference step in degrees.
pub const AFTI16_PITCH_REF: f64 = 10.0;

/// AFTI-16 aircraft: ZOH model at 0.05 s, horizon 5, `|u_i| ≤ 25`,
/// `|y_1| ≤ 0.5`, `|y_2| ≤ 100`, penalties 10³ (outputs) and 10⁴ (inputs).
pub fn afti16_setup() -> (LtiModel, MpcConfig) {
    let ac = DenseMatrix::from_rows(&[
        &[-0.0151, -60.5651, 0.0, -32.174],
        &[-0.0001, -1.3411, 0.9929, 0.0],
        &[0.00018, 43.2541, -0.86939, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
    .expect("constant");
    let bc = DenseMatrix::from_rows(&[
        &[-2.516, -13.136],
        &[-0.1689, -0.2514],
        &[-17.251, -1.5766],
        &[0.0, 0.0],
    ])
    .expect("constant");
    let c = DenseMatrix::from_rows(&[&[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]).expect("constant");
    let (a, b) = zoh_discretize(&ac, &bc, AFTI16_TS).expect("valid sampling time");
    let model = LtiModel::new(a, b, c, AFTI16_TS).expect("consistent");
    let constraints = StageConstraints::output_input_box(
        &model,
        &[(-0.5, 0.5), (-100.0, 100.0)],
        &[(-25.0, 25.0), (-25.0, 25.0)],
        1e3,
        1e4,
    );
    let cfg = MpcConfig {
        horizon: 5,
        wy: vec![10.0, 10.0],
        wdu: vec![0.1, 0.1],
        constraints,
    };
    (model, cfg)
}
