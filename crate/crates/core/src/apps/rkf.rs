//! Kalman filter and its robust variant that strips sparse measurement
//! outliers by solving a small Lasso at every update.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::lti::LtiModel;
use crate::certificate::Algorithm;
use crate::error::{Error, Result};
use crate::linalg::{self, cholesky_factor, spd_inverse, DenseMatrix};
use crate::problem::SolverOptions;
use crate::transforms::{lasso_to_boxqp, LassoProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RkfConfig {
    /// Process noise covariance.
    pub qn: DenseMatrix,
    /// Measurement noise covariance.
    pub rn: DenseMatrix,
    /// ℓ1 weight on the outlier estimate.
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KfState {
    pub xhat: Vec<f64>,
    pub p: DenseMatrix,
}

/// Per-update diagnostics of the outlier Lasso.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RkfStats {
    pub screened: bool,
    /// `‖W e‖∞`, the smallest `ρ/2` for which `ẑ = 0`.
    pub zero_threshold: f64,
    pub qp_dim: usize,
    pub duality_gap: f64,
    pub iterations: u64,
    pub rank1: u64,
}

fn symmetrize(m: &mut DenseMatrix) {
    let n = m.rows();
    for r in 0..n {
        for c in 0..r {
            let v = 0.5 * (m[(r, c)] + m[(c, r)]);
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
    }
}

/// `x̂ ← Ax̂ + Bu`, `P ← APAᵀ + Q`.
pub fn kf_predict(st: &KfState, model: &LtiModel, u: &[f64], cfg: &RkfConfig) -> KfState {
    let xhat = model.step(&st.xhat, u);
    let apa = model.a.matmul(&st.p).and_then(|m| m.matmul(&model.a.transpose())).expect("shape checked");
    let mut p = apa.add(&cfg.qn).expect("shape checked");
    symmetrize(&mut p);
    KfState { xhat, p }
}

/// Gain `L = PCᵀ(CPCᵀ + R)⁻¹` and innovation `e = y − Cx̂`.
fn gain(st: &KfState, y: &[f64], model: &LtiModel, cfg: &RkfConfig) -> Result<(DenseMatrix, Vec<f64>)> {
    if y.len() != model.ny() {
        return Err(Error::Shape(format!(
            "measurement has length {}, expected {}",
            y.len(),
            model.ny()
        )));
    }
    let pct = st.p.matmul(&model.c.transpose())?;
    let mut s = model.c.matmul(&pct)?.add(&cfg.rn)?;
    symmetrize(&mut s);
    let s_inv = spd_inverse(&s).map_err(|_| Error::NotSpd { what: "CPCᵀ + R" })?;
    let l = pct.matmul(&s_inv)?;
    let cx = model.output(&st.xhat);
    let e = y.iter().zip(&cx).map(|(a, b)| a - b).collect();
    Ok((l, e))
}

fn apply_update(st: &KfState, model: &LtiModel, l: &DenseMatrix, innovation: &[f64]) -> KfState {
    let mut xhat = st.xhat.clone();
    let corr = linalg::matvec(l, innovation).expect("shape checked");
    for (x, c) in xhat.iter_mut().zip(&corr) {
        *x += c;
    }
    let nx = model.nx();
    let lc = l.matmul(&model.c).expect("shape checked");
    let i_lc = DenseMatrix::identity(nx).sub(&lc).expect("square");
    let mut p = i_lc.matmul(&st.p).expect("shape checked");
    symmetrize(&mut p);
    KfState { xhat, p }
}

/// Standard measurement update.
pub fn kf_update(st: &KfState, y: &[f64], model: &LtiModel, cfg: &RkfConfig) -> Result<KfState> {
    let (l, e) = gain(st, y, model, cfg)?;
    Ok(apply_update(st, model, &l, &e))
}

/// `W = (I − CL)ᵀR⁻¹(I − CL) + LᵀP⁻¹L`. A singular `P` is regularized
/// with `1e-10·I`.
pub fn rkf_weight(st: &KfState, l: &DenseMatrix, model: &LtiModel, cfg: &RkfConfig) -> Result<DenseMatrix> {
    let ny = model.ny();
    let cl = model.c.matmul(l)?;
    let i_cl = DenseMatrix::identity(ny).sub(&cl)?;
    let r_inv = spd_inverse(&cfg.rn).map_err(|_| Error::NotSpd { what: "R" })?;
    let p_inv = match spd_inverse(&st.p) {
        Ok(m) => m,
        Err(_) => {
            let mut reg = st.p.clone();
            reg.add_diag(&vec![1e-10; model.nx()]);
            spd_inverse(&reg).map_err(|_| Error::NotSpd { what: "P" })?
        }
    };
    let a = i_cl.transpose().matmul(&r_inv)?.matmul(&i_cl)?;
    let b = l.transpose().matmul(&p_inv)?.matmul(l)?;
    let mut w = a.add(&b)?;
    symmetrize(&mut w);
    Ok(w)
}

/// Robust update: `ẑ = argmin (e − ẑ)ᵀW(e − ẑ) + ρ‖ẑ‖₁`, then the standard
/// update with innovation `e − ẑ`.
///
/// With `W = AᵀA` (Cholesky) the problem is twice the Lasso
/// `½‖Aẑ − Ae‖² + (ρ/2)‖ẑ‖₁`. When `‖W e‖∞ ≤ ρ/2`, `ẑ = 0` satisfies the
/// optimality conditions exactly and the solve is skipped.
pub fn rkf_update(
    st: &KfState,
    y: &[f64],
    model: &LtiModel,
    cfg: &RkfConfig,
    algorithm: Algorithm,
    opts: &SolverOptions,
) -> Result<(KfState, Vec<f64>, RkfStats)> {
    let (l, e) = gain(st, y, model, cfg)?;
    let w = rkf_weight(st, &l, model, cfg)?;
    let lambda = 0.5 * cfg.rho;
    let we = linalg::matvec(&w, &e)?;
    let ny = model.ny();
    let zero_threshold = linalg::norm_inf(&we);
    if zero_threshold <= lambda {
        let stats = RkfStats {
            screened: true,
            zero_threshold,
            qp_dim: ny,
            ..Default::default()
        };
        return Ok((apply_update(st, model, &l, &e), vec![0.0; ny], stats));
    }
    let factor = cholesky_factor(&w).map_err(|_| Error::NotSpd { what: "W" })?;
    let a = factor.into_lower().transpose();
    let b = linalg::matvec(&a, &e)?;
    let lasso = LassoProblem::new(a, b, lambda)?;
    let (qp, rec) = lasso_to_boxqp(&lasso)?;
    let sol = crate::solve(&qp, algorithm, opts)?;
    let zhat = rec.recover(&sol.z_star);
    let cleaned: Vec<f64> = e.iter().zip(&zhat).map(|(a, b)| a - b).collect();
    let stats = RkfStats {
        screened: false,
        zero_threshold,
        qp_dim: qp.n(),
        duality_gap: sol.duality_gap,
        iterations: sol.iterations_run,
        rank1: sol.rank1_used,
    };
    Ok((apply_update(st, model, &l, &cleaned), zhat, stats))
}

/// Three-tank plant (unit sampling period).
pub fn three_tank_model() -> LtiModel {
    let a = DenseMatrix::from_rows(&[&[0.9, 0.0, 0.0], &[0.0, 0.5, 0.0], &[0.1, 0.5, 0.8]]).expect("constant");
    let b = DenseMatrix::from_rows(&[&[0.5], &[0.5], &[0.0]]).expect("constant");
    let c = DenseMatrix::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]).expect("constant");
    LtiModel::new(a, b, c, 1.0).expect("consistent")
}

/// Noise and outlier settings for the three-tank study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RkfScenario {
    pub seed: u64,
    pub steps: usize,
    /// Standard deviation of each process noise component.
    pub process_std: f64,
    /// Standard deviation of each measurement noise component.
    pub measurement_std: f64,
    /// Probability that a measurement channel carries an outlier.
    pub outlier_prob: f64,
    /// Outlier magnitude in units of `measurement_std`.
    pub outlier_sigmas: f64,
    pub rho: f64,
    pub x0: Vec<f64>,
}

impl Default for RkfScenario {
    fn default() -> Self {
        Self {
            seed: 0,
            steps: 200,
            process_std: 0.05,
            measurement_std: 0.1,
            outlier_prob: 0.05,
            outlier_sigmas: 10.0,
            rho: 20.0,
            x0: vec![0.0; 3],
        }
    }
}

impl RkfScenario {
    pub fn config(&self) -> RkfConfig {
        RkfConfig {
            qn: DenseMatrix::identity(3).scaled(self.process_std.powi(2)),
            rn: DenseMatrix::identity(2).scaled(self.measurement_std.powi(2)),
            rho: self.rho,
        }
    }
}

/// Plant and noise defaults for the three-tank study.
pub fn three_tank_setup() -> (LtiModel, RkfConfig) {
    (three_tank_model(), RkfScenario::default().config())
}

/// Known input applied to the tanks at step `t`.
pub fn three_tank_input(t: usize) -> Vec<f64> {
    vec![1.0 + 0.5 * (0.05 * t as f64).sin()]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RkfSample {
    pub t: usize,
    pub x_true: Vec<f64>,
    pub x_kf: Vec<f64>,
    pub x_rkf: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub outlier: Vec<f64>,
    pub stats: RkfStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RkfRun {
    pub samples: Vec<RkfSample>,
    pub rms_kf: Vec<f64>,
    pub rms_rkf: Vec<f64>,
}

/// Simulates the noisy plant once and runs both filters on the same
/// measurements.
pub fn run_rkf_scenario(sc: &RkfScenario, algorithm: Algorithm, opts: &SolverOptions) -> Result<RkfRun> {
    let model = three_tank_model();
    let cfg = sc.config();
    if sc.x0.len() != model.nx() {
        return Err(Error::Shape(format!("x0 has length {}, expected {}", sc.x0.len(), model.nx())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let gauss = move |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };

    let init = KfState {
        xhat: vec![0.0; model.nx()],
        p: DenseMatrix::identity(model.nx()),
    };
    let mut kf = init.clone();
    let mut rkf = init;
    let mut x = sc.x0.clone();
    let mut u_prev = vec![0.0; model.nu()];
    let mut samples = Vec::with_capacity(sc.steps);
    for t in 0..sc.steps {
        if t > 0 {
            x = model.step(&x, &u_prev);
            for v in &mut x {
                *v += sc.process_std * gauss(&mut rng);
            }
            kf = kf_predict(&kf, &model, &u_prev, &cfg);
            rkf = kf_predict(&rkf, &model, &u_prev, &cfg);
        }
        let mut y = model.output(&x);
        let mut outlier = vec![0.0; y.len()];
        for (yi, oi) in y.iter_mut().zip(&mut outlier) {
            *yi += sc.measurement_std * gauss(&mut rng);
            if rng.random::<f64>() < sc.outlier_prob {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                *oi = sign * sc.outlier_sigmas * sc.measurement_std;
                *yi += *oi;
            }
        }
        kf = kf_update(&kf, &y, &model, &cfg)?;
        let (next, _, stats) = rkf_update(&rkf, &y, &model, &cfg, algorithm, opts)?;
        rkf = next;
        let u = three_tank_input(t);
        samples.push(RkfSample {
            t,
            x_true: x.clone(),
            x_kf: kf.xhat.clone(),
            x_rkf: rkf.xhat.clone(),
            u: u.clone(),
            y,
            outlier,
            stats,
        });
        u_prev = u;
    }
    let truth: Vec<Vec<f64>> = samples.iter().map(|s| s.x_true.clone()).collect();
    let est_kf: Vec<Vec<f64>> = samples.iter().map(|s| s.x_kf.clone()).collect();
    let est_rkf: Vec<Vec<f64>> = samples.iter().map(|s| s.x_rkf.clone()).collect();
    Ok(RkfRun {
        rms_kf: rms_error(&truth, &est_kf),
        rms_rkf: rms_error(&truth, &est_rkf),
        samples,
    })
}

/// Per-component root-mean-square error.
pub fn rms_error(truth: &[Vec<f64>], estimates: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = truth.first() else {
        return Vec::new();
    };
    let mut acc = vec![0.0; first.len()];
    for (t, e) in truth.iter().zip(estimates) {
        for (a, (x, y)) in acc.iter_mut().zip(t.iter().zip(e)) {
            *a += (x - y) * (x - y);
        }
    }
    let m = truth.len().min(estimates.len()) as f64;
    acc.into_iter().map(|a| (a / m).sqrt()).collect()
}
