//! Reductions to the canonical Box-QP and the maps that carry a Box-QP
//! optimum back to the original problem.
//!
//! | problem                     | recovery                                 |
//! |-----------------------------|------------------------------------------|
//! | ℓ1-penalised strict QP      | `y* = −Q⁻¹(q + ½Gᵀ(ρ∘z* + ρ))`           |
//! | Lasso                       | `x* = (AᵀA)⁻¹(Aᵀb − λz*)`                |
//! | soft-margin SVM (dual)      | duals `(ρ/2)(z* + e)`, `w* = Σ zᵢ yᵢ φᵢ` |
//! | general box `l ≤ y ≤ u`     | `y* = D z* + c`                          |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cholesky_factor, dot, matvec, CholeskyFactor, DenseMatrix};
use crate::problem::BoxQP;

/// `min ½yᵀQy + qᵀy  s.t.  Gy ≤ g`, softened by the penalty
/// `‖ρ∘max(0, Gy − g)‖₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrictQP {
    pub q_mat: DenseMatrix,
    pub q: Vec<f64>,
    pub g_mat: DenseMatrix,
    pub g: Vec<f64>,
    pub rho: Vec<f64>,
}

impl StrictQP {
    pub fn ny(&self) -> usize {
        self.q.len()
    }

    pub fn ng(&self) -> usize {
        self.g.len()
    }

    fn check_shapes(&self) -> Result<()> {
        let (ny, ng) = (self.ny(), self.ng());
        if self.q_mat.rows() != ny || self.q_mat.cols() != ny {
            return Err(Error::Shape(format!(
                "Q is {}x{} but q has length {ny}",
                self.q_mat.rows(),
                self.q_mat.cols()
            )));
        }
        if self.g_mat.rows() != ng || self.g_mat.cols() != ny {
            return Err(Error::Shape(format!(
                "G is {}x{}, expected {ng}x{ny}",
                self.g_mat.rows(),
                self.g_mat.cols()
            )));
        }
        if self.rho.len() != ng {
            return Err(Error::Shape(format!("rho has length {}, expected {ng}", self.rho.len())));
        }
        if let Some(i) = self.rho.iter().position(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::Shape(format!("rho[{i}] = {} must be positive", self.rho[i])));
        }
        Ok(())
    }

    /// `½yᵀQy + qᵀy + ‖ρ∘max(0, Gy − g)‖₁`.
    pub fn penalized_objective(&self, y: &[f64]) -> f64 {
        let qy = matvec(&self.q_mat, y).expect("shape checked");
        let gy = matvec(&self.g_mat, y).expect("shape checked");
        let penalty: f64 = gy
            .iter()
            .zip(&self.g)
            .zip(&self.rho)
            .map(|((a, b), r)| r * (a - b).max(0.0))
            .sum();
        0.5 * dot(y, &qy) + dot(&self.q, y) + penalty
    }

    /// Largest constraint violation `max(0, max(Gy − g))`.
    pub fn max_violation(&self, y: &[f64]) -> f64 {
        let gy = matvec(&self.g_mat, y).expect("shape checked");
        gy.iter().zip(&self.g).map(|(a, b)| a - b).fold(0.0, f64::max)
    }
}

/// `min ½‖Ax − b‖² + λ‖x‖₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoProblem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub lambda: f64,
}

impl LassoProblem {
    pub fn new(a: DenseMatrix, b: Vec<f64>, lambda: f64) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(Error::Shape(format!("A has {} rows but b has length {}", a.rows(), b.len())));
        }
        if a.rows() < a.cols() {
            return Err(Error::Shape(format!("A is {}x{}; need m >= n", a.rows(), a.cols())));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Shape(format!("lambda = {lambda} must be positive")));
        }
        Ok(Self { a, b, lambda })
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let r = self.residual(x);
        0.5 * dot(&r, &r) + self.lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// `Ax − b`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = matvec(&self.a, x).expect("shape checked");
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        r
    }

    /// `Aᵀ(Ax − b)`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        linalg::matvec_transpose(&self.a, &self.residual(x)).expect("shape checked")
    }

    /// `‖Aᵀb‖∞`, the smallest λ for which `x* = 0`.
    pub fn lambda_max(&self) -> f64 {
        linalg::norm_inf(&linalg::matvec_transpose(&self.a, &self.b).expect("shape checked"))
    }

    /// `AᵀA`, exactly symmetric.
    pub fn gram(&self) -> DenseMatrix {
        linalg::gram(&self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    /// `xᵀy + 1`.
    Linear,
    /// `exp(−‖x − y‖² / (2σ²)) + 1`.
    Rbf { sigma: f64 },
}

impl Kernel {
    /// Kernel value on bias-augmented features.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(x, y) + 1.0,
            Kernel::Rbf { sigma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp() + 1.0
            }
        }
    }

    /// Gram matrix over the rows of `x`.
    pub fn gram(&self, x: &DenseMatrix) -> DenseMatrix {
        let m = x.rows();
        let mut k = DenseMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = self.eval(x.row(i), x.row(j));
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }
}

/// Soft-margin SVM with the bias folded into the features.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmProblem {
    pub labels: Vec<f64>,
    pub gram: DenseMatrix,
    pub rho: f64,
    /// Training points and kernel, kept when available so the model can
    /// score unseen points.
    pub features: Option<(DenseMatrix, Kernel)>,
}

impl SvmProblem {
    pub fn from_gram(labels: Vec<f64>, gram: DenseMatrix, rho: f64) -> Result<Self> {
        let m = labels.len();
        if gram.rows() != m || gram.cols() != m {
            return Err(Error::Shape(format!(
                "gram is {}x{} but there are {m} labels",
                gram.rows(),
                gram.cols()
            )));
        }
        Self::check(&labels, rho)?;
        Ok(Self {
            labels,
            gram,
            rho,
            features: None,
        })
    }

    pub fn from_features(x: DenseMatrix, labels: Vec<f64>, rho: f64, kernel: Kernel) -> Result<Self> {
        if x.rows() != labels.len() {
            return Err(Error::Shape(format!(
                "X has {} rows but there are {} labels",
                x.rows(),
                labels.len()
            )));
        }
        Self::check(&labels, rho)?;
        Ok(Self {
            gram: kernel.gram(&x),
            labels,
            rho,
            features: Some((x, kernel)),
        })
    }

    fn check(labels: &[f64], rho: f64) -> Result<()> {
        if labels.is_empty() {
            return Err(Error::Shape("no training points".into()));
        }
        if let Some((index, &value)) = labels.iter().enumerate().find(|(_, v)| **v != 1.0 && **v != -1.0) {
            return Err(Error::InvalidLabels { index, value });
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Shape(format!("rho = {rho} must be positive")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct L1Recovery {
    q_factor: CholeskyFactor,
    g_mat: DenseMatrix,
    q: Vec<f64>,
    rho: Vec<f64>,
}

impl L1Recovery {
    pub fn recover(&self, z_star: &[f64]) -> Vec<f64> {
        recover_l1(z_star, self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoRecovery {
    factor: CholeskyFactor,
    atb: Vec<f64>,
    lambda: f64,
}

impl LassoRecovery {
    pub fn recover(&self, z_star: &[f64]) -> Vec<f64> {
        recover_lasso(z_star, self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmRecovery {
    labels: Vec<f64>,
    rho: f64,
    features: Option<(DenseMatrix, Kernel)>,
}

impl SvmRecovery {
    pub fn recover(&self, z_star: &[f64]) -> SvmModel {
        recover_svm(z_star, self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenBoxRecovery {
    half_width: Vec<f64>,
    center: Vec<f64>,
}

impl GenBoxRecovery {
    pub fn recover(&self, z_star: &[f64]) -> Vec<f64> {
        z_star
            .iter()
            .zip(&self.half_width)
            .zip(&self.center)
            .map(|((z, d), c)| d * z + c)
            .collect()
    }
}

/// Any of the recovery maps, for callers that handle problems generically.
#[derive(Debug, Clone, PartialEq)]
pub enum Recovery {
    L1Qp(L1Recovery),
    Lasso(LassoRecovery),
    Svm(SvmRecovery),
    GenBox(GenBoxRecovery),
}

impl Recovery {
    pub fn kind(&self) -> &'static str {
        match self {
            Recovery::L1Qp(_) => "l1qp",
            Recovery::Lasso(_) => "lasso",
            Recovery::Svm(_) => "svm",
            Recovery::GenBox(_) => "genbox",
        }
    }

    /// Original-space point. For the SVM this is the dual vector in `[0, ρ]`.
    pub fn recover(&self, z_star: &[f64]) -> Vec<f64> {
        match self {
            Recovery::L1Qp(r) => r.recover(z_star),
            Recovery::Lasso(r) => r.recover(z_star),
            Recovery::Svm(r) => r.recover(z_star).duals,
            Recovery::GenBox(r) => r.recover(z_star),
        }
    }
}

/// Relative pivot size below which `AᵀA` counts as singular.
const RANK_TOL: f64 = 1e-12;

/// `L⁻¹B` column by column.
fn forward_solve_columns(f: &CholeskyFactor, b: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(b.rows(), b.cols());
    let mut col = vec![0.0; b.rows()];
    for c in 0..b.cols() {
        for (r, v) in col.iter_mut().enumerate() {
            *v = b[(r, c)];
        }
        f.forward_in_place(&mut col);
        for (r, v) in col.iter().enumerate() {
            out[(r, c)] = *v;
        }
    }
    out
}

/// ℓ1-penalty reduction of a strictly convex QP.
///
/// With `Q = LLᵀ` and `W = L⁻¹Gᵀ`, `GQ⁻¹Gᵀ = WᵀW` and `GQ⁻¹q = Wᵀ(L⁻¹q)`, so
/// `H` is assembled as a Gram matrix and is PSD by construction.
pub fn l1_penalty_to_boxqp(p: &StrictQP) -> Result<(BoxQP, L1Recovery)> {
    p.check_shapes()?;
    let factor = cholesky_factor(&p.q_mat).map_err(|_| Error::NotSpd { what: "Q" })?;
    let w = forward_solve_columns(&factor, &p.g_mat.transpose());
    let mut lq = p.q.clone();
    factor.forward_in_place(&mut lq);

    let s = linalg::gram(&w);
    let ng = p.ng();
    let hess = DenseMatrix::from_fn(ng, ng, |i, j| p.rho[i] * s[(i, j)] * p.rho[j]);
    let s_rho = matvec(&s, &p.rho)?;
    let wt_lq = linalg::matvec_transpose(&w, &lq)?;
    let lin = (0..ng)
        .map(|i| p.rho[i] * (s_rho[i] + 2.0 * (wt_lq[i] + p.g[i])))
        .collect();
    let rec = L1Recovery {
        q_factor: factor,
        g_mat: p.g_mat.clone(),
        q: p.q.clone(),
        rho: p.rho.clone(),
    };
    Ok((BoxQP::new(hess, lin)?, rec))
}

/// `y* = −Q⁻¹(q + ½Gᵀ(ρ∘z* + ρ))`.
pub fn recover_l1(z_star: &[f64], r: &L1Recovery) -> Vec<f64> {
    let w: Vec<f64> = z_star
        .iter()
        .zip(&r.rho)
        .map(|(z, rho)| 0.5 * (rho * z + rho))
        .collect();
    let gtw = linalg::matvec_transpose(&r.g_mat, &w).expect("shape checked");
    let mut rhs: Vec<f64> = r.q.iter().zip(&gtw).map(|(a, b)| -(a + b)).collect();
    r.q_factor.solve_in_place(&mut rhs).expect("shape checked");
    rhs
}

/// Lasso dual reduction: `H = λ(AᵀA)⁻¹`, `h = −(AᵀA)⁻¹Aᵀb`.
pub fn lasso_to_boxqp(p: &LassoProblem) -> Result<(BoxQP, LassoRecovery)> {
    let gram = p.gram();
    let factor = cholesky_factor(&gram).map_err(|_| Error::RankDeficient)?;
    let diag_max = gram.diagonal().into_iter().fold(0.0, f64::max);
    let pivot_min = factor.lower().diagonal().into_iter().fold(f64::INFINITY, f64::min);
    if pivot_min * pivot_min <= RANK_TOL * diag_max {
        return Err(Error::RankDeficient);
    }
    let inv = linalg::spd_inverse(&factor.reconstruct()).map_err(|_| Error::RankDeficient)?;
    let atb = linalg::matvec_transpose(&p.a, &p.b)?;
    let mut lin = factor.solve(&atb)?;
    for v in &mut lin {
        *v = -*v;
    }
    let rec = LassoRecovery {
        factor,
        atb,
        lambda: p.lambda,
    };
    Ok((BoxQP::new(inv.scaled(p.lambda), lin)?, rec))
}

/// `x* = (AᵀA)⁻¹(Aᵀb − λz*)`.
pub fn recover_lasso(z_star: &[f64], r: &LassoRecovery) -> Vec<f64> {
    let mut rhs: Vec<f64> = r.atb.iter().zip(z_star).map(|(a, z)| a - r.lambda * z).collect();
    r.factor.solve_in_place(&mut rhs).expect("shape checked");
    rhs
}

/// Worst violation of the Lasso optimality conditions, relative to λ.
///
/// Entries with `|xᵢ| ≤ zero_tol` must satisfy `|gᵢ| ≤ λ`; the others
/// `gᵢ = −λ·sign(xᵢ)`, where `g = Aᵀ(Ax − b)`.
pub fn lasso_kkt_violation(p: &LassoProblem, x: &[f64], zero_tol: f64) -> f64 {
    let g = p.gradient(x);
    let lam = p.lambda;
    x.iter()
        .zip(&g)
        .map(|(xi, gi)| {
            if xi.abs() <= zero_tol {
                (gi.abs() - lam).max(0.0) / lam
            } else {
                (gi + lam * xi.signum()).abs() / lam
            }
        })
        .fold(0.0, f64::max)
}

/// Dual of the soft-margin SVM mapped from `[0, ρ]` onto `[−e, e]`.
pub fn svm_to_boxqp(p: &SvmProblem) -> Result<(BoxQP, SvmRecovery)> {
    let m = p.labels.len();
    let half = 0.5 * p.rho;
    let yky = DenseMatrix::from_fn(m, m, |i, j| p.labels[i] * p.gram[(i, j)] * p.labels[j]);
    let row_sums: Vec<f64> = (0..m).map(|i| yky.row(i).iter().sum()).collect();
    let hess = yky.scaled(half * half);
    let lin = row_sums.iter().map(|s| half * (half * s - 1.0)).collect();
    let rec = SvmRecovery {
        labels: p.labels.clone(),
        rho: p.rho,
        features: p.features.clone(),
    };
    Ok((BoxQP::new(hess, lin)?, rec))
}

/// Trained classifier: `f(x) = Σ zᵢ yᵢ k(x, xᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// Dual multipliers in `[0, ρ]`.
    pub duals: Vec<f64>,
    pub labels: Vec<f64>,
    features: Option<(DenseMatrix, Kernel)>,
}

impl SvmModel {
    /// Decision value at training point `i` using a precomputed gram matrix.
    pub fn decision_from_gram(&self, gram: &DenseMatrix, i: usize) -> f64 {
        (0..self.duals.len())
            .map(|j| self.duals[j] * self.labels[j] * gram[(i, j)])
            .sum()
    }

    /// Decision value at an arbitrary point. `None` when trained from a
    /// bare gram matrix.
    pub fn decision(&self, x: &[f64]) -> Option<f64> {
        let (xs, kernel) = self.features.as_ref()?;
        Some(
            (0..self.duals.len())
                .map(|j| self.duals[j] * self.labels[j] * kernel.eval(x, xs.row(j)))
                .sum(),
        )
    }

    /// `w*` over the augmented features `[x; 1]` (linear kernel only).
    pub fn linear_weights(&self) -> Option<Vec<f64>> {
        let (xs, Kernel::Linear) = self.features.as_ref()? else {
            return None;
        };
        let mut w = vec![0.0; xs.cols() + 1];
        for j in 0..self.duals.len() {
            let c = self.duals[j] * self.labels[j];
            linalg::axpy(c, xs.row(j), &mut w[..xs.cols()]);
            w[xs.cols()] += c;
        }
        Some(w)
    }
}

/// Duals `(ρ/2)(z* + e)` and the prediction model.
pub fn recover_svm(z_star: &[f64], r: &SvmRecovery) -> SvmModel {
    let half = 0.5 * r.rho;
    SvmModel {
        duals: z_star.iter().map(|z| half * (z + 1.0)).collect(),
        labels: r.labels.clone(),
        features: r.features.clone(),
    }
}

/// Maps `l ≤ y ≤ u` onto `−e ≤ z ≤ e` with `y = Dz + c`,
/// `D = diag((u − l)/2)`, `c = (u + l)/2`.
pub fn genbox_to_unitbox(hess: &DenseMatrix, lin: &[f64], l: &[f64], u: &[f64]) -> Result<(BoxQP, GenBoxRecovery)> {
    let n = lin.len();
    if l.len() != n || u.len() != n {
        return Err(Error::Shape(format!(
            "bounds have lengths {} and {}, expected {n}",
            l.len(),
            u.len()
        )));
    }
    if hess.rows() != n || hess.cols() != n {
        return Err(Error::Shape(format!("H is {}x{}, expected {n}x{n}", hess.rows(), hess.cols())));
    }
    for i in 0..n {
        if !(l[i] < u[i]) || !l[i].is_finite() || !u[i].is_finite() {
            return Err(Error::InvalidBounds {
                index: i,
                lower: l[i],
                upper: u[i],
            });
        }
    }
    let half_width: Vec<f64> = l.iter().zip(u).map(|(a, b)| 0.5 * (b - a)).collect();
    let center: Vec<f64> = l.iter().zip(u).map(|(a, b)| 0.5 * (b + a)).collect();
    let scaled = DenseMatrix::from_fn(n, n, |i, j| half_width[i] * hess[(i, j)] * half_width[j]);
    let hc = matvec(hess, &center)?;
    let lin2 = (0..n).map(|i| half_width[i] * (hc[i] + lin[i])).collect();
    Ok((BoxQP::new(scaled, lin2)?, GenBoxRecovery { half_width, center }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{solve_approx, solve_exact, SolverOptions};

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    fn tight() -> SolverOptions {
        SolverOptions::default().with_epsilon(1e-9)
    }

    #[test]
    fn l1_scalar_example() {
        let p = StrictQP {
            q_mat: m(&[&[2.0]]),
            q: vec![0.0],
            g_mat: m(&[&[1.0]]),
            g: vec![1.0],
            rho: vec![1.0],
        };
        let (qp, rec) = l1_penalty_to_boxqp(&p).unwrap();
        assert!((qp.hess()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((qp.lin()[0] - 2.5).abs() < 1e-15);
        let s = solve_exact(&qp, &tight()).unwrap();
        let y = rec.recover(&s.z_star);
        // brute-force grid over the penalised scalar objective
        let best = (-4000..=4000)
            .map(|k| k as f64 * 1e-3)
            .min_by(|a, b| p.penalized_objective(&[*a]).total_cmp(&p.penalized_objective(&[*b])))
            .unwrap();
        assert!((y[0] - best).abs() < 1e-3);
        assert!(y[0].abs() < 1e-6);
    }

    #[test]
    fn l1_zero_constraint_matrix() {
        let p = StrictQP {
            q_mat: m(&[&[1.0, 0.0], &[0.0, 2.0]]),
            q: vec![1.0, -1.0],
            g_mat: DenseMatrix::zeros(3, 2),
            g: vec![1.0, 2.0, -0.5],
            rho: vec![2.0, 1.0, 3.0],
        };
        let (qp, _) = l1_penalty_to_boxqp(&p).unwrap();
        assert_eq!(qp.hess().max_abs(), 0.0);
        assert_eq!(qp.lin(), &[4.0, 4.0, -3.0]);
    }

    #[test]
    fn l1_inactive_side_gives_unconstrained_optimum() {
        let p = StrictQP {
            q_mat: m(&[&[2.0, 0.5], &[0.5, 1.0]]),
            q: vec![1.0, -2.0],
            g_mat: m(&[&[1.0, 1.0], &[-1.0, 0.5]]),
            g: vec![1.0, 1.0],
            rho: vec![1.0, 1.0],
        };
        let (_, rec) = l1_penalty_to_boxqp(&p).unwrap();
        let y = rec.recover(&[-1.0, -1.0]);
        let f = cholesky_factor(&p.q_mat).unwrap();
        let expect = f.solve(&[-1.0, 2.0]).unwrap();
        for i in 0..2 {
            assert!((y[i] - expect[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn l1_rejects_indefinite_q() {
        let p = StrictQP {
            q_mat: m(&[&[1.0, 2.0], &[2.0, 1.0]]),
            q: vec![0.0, 0.0],
            g_mat: m(&[&[1.0, 0.0]]),
            g: vec![1.0],
            rho: vec![1.0],
        };
        assert!(matches!(l1_penalty_to_boxqp(&p), Err(Error::NotSpd { what: "Q" })));
    }

    #[test]
    fn l1_interior_feasible_instance_is_feasible() {
        // unconstrained optimum (2, 2) violates y1 + y2 ≤ 1
        let p = StrictQP {
            q_mat: DenseMatrix::identity(2),
            q: vec![-2.0, -2.0],
            g_mat: m(&[&[1.0, 1.0], &[-1.0, 0.0]]),
            g: vec![1.0, 5.0],
            rho: vec![100.0, 100.0],
        };
        let (qp, rec) = l1_penalty_to_boxqp(&p).unwrap();
        let s = solve_exact(&qp, &tight()).unwrap();
        let y = rec.recover(&s.z_star);
        assert!(p.max_violation(&y) < 1e-5, "{y:?}");
        assert!((y[0] - 0.5).abs() < 1e-5 && (y[1] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn lasso_identity_example() {
        let p = LassoProblem::new(DenseMatrix::identity(2), vec![3.0, 0.0], 1.0).unwrap();
        let (qp, rec) = lasso_to_boxqp(&p).unwrap();
        assert_eq!(qp.hess(), &DenseMatrix::identity(2));
        assert_eq!(qp.lin(), &[-3.0, 0.0]);
        let s = solve_approx(&qp, &tight()).unwrap();
        let x = rec.recover(&s.z_star);
        // soft-threshold of b at λ = 1
        assert!((x[0] - 2.0).abs() < 1e-5 && x[1].abs() < 1e-5, "{x:?}");
    }

    #[test]
    fn lasso_zero_multiplier_gives_least_squares() {
        let a = m(&[&[1.0, 0.0], &[1.0, 1.0], &[0.0, 2.0]]);
        let p = LassoProblem::new(a, vec![1.0, 2.0, 3.0], 0.5).unwrap();
        let (_, rec) = lasso_to_boxqp(&p).unwrap();
        let x = rec.recover(&[0.0, 0.0]);
        let g = p.gradient(&x);
        assert!(linalg::norm_inf(&g) < 1e-12);
    }

    #[test]
    fn lasso_rank_deficient() {
        let a = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let p = LassoProblem::new(a, vec![1.0, 2.0], 0.5).unwrap();
        assert!(matches!(lasso_to_boxqp(&p), Err(Error::RankDeficient)));
    }

    #[test]
    fn lasso_large_lambda_gives_zero() {
        let a = m(&[&[1.0, 0.2], &[0.3, 1.0], &[0.5, 0.5]]);
        let b = vec![1.0, -1.0, 0.5];
        let lam = LassoProblem::new(a.clone(), b.clone(), 1.0).unwrap().lambda_max();
        let p = LassoProblem::new(a, b, lam * 1.01).unwrap();
        let (qp, rec) = lasso_to_boxqp(&p).unwrap();
        let s = solve_approx(&qp, &tight()).unwrap();
        assert!(linalg::norm_inf(&rec.recover(&s.z_star)) < 1e-5);
    }

    #[test]
    fn svm_two_points() {
        let x = m(&[&[1.0, 1.0], &[-1.0, -1.0]]);
        let p = SvmProblem::from_features(x.clone(), vec![1.0, -1.0], 10.0, Kernel::Linear).unwrap();
        let (qp, rec) = svm_to_boxqp(&p).unwrap();
        let s = solve_exact(&qp, &tight()).unwrap();
        let model = rec.recover(&s.z_star);
        assert!(model.duals.iter().all(|d| (0.0..=10.0).contains(d)));
        let w = model.linear_weights().unwrap();
        // w·(1,1) + b = 1 and w·(−1,−1) + b = −1 with the smallest ‖(w, b)‖: w = (½, ½), b = 0
        assert!((w[0] - 0.5).abs() < 1e-5 && (w[1] - 0.5).abs() < 1e-5 && w[2].abs() < 1e-5, "{w:?}");
        assert!(model.decision(x.row(0)).unwrap() > 0.0);
        assert!(model.decision(x.row(1)).unwrap() < 0.0);
    }

    #[test]
    fn svm_rbf_gram_has_bias_term() {
        let x = m(&[&[0.0], &[3.0]]);
        let k = Kernel::Rbf { sigma: 1.0 }.gram(&x);
        assert_eq!(k[(0, 0)], 2.0);
        assert!((k[(0, 1)] - ((-4.5f64).exp() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn svm_rejects_bad_labels() {
        let r = SvmProblem::from_gram(vec![1.0, 0.0], DenseMatrix::identity(2), 1.0);
        assert!(matches!(r, Err(Error::InvalidLabels { index: 1, .. })));
    }

    #[test]
    fn genbox_identity_and_scalar() {
        let h = m(&[&[2.0, 0.5], &[0.5, 1.0]]);
        let (qp, rec) = genbox_to_unitbox(&h, &[1.0, -1.0], &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(qp.hess(), &h);
        assert_eq!(qp.lin(), &[1.0, -1.0]);
        assert_eq!(rec.recover(&[0.3, -0.2]), vec![0.3, -0.2]);

        let (qp, rec) = genbox_to_unitbox(&m(&[&[2.0]]), &[0.0], &[0.0], &[4.0]).unwrap();
        // the minimiser sits on the bound with a zero multiplier, so the
        // error only shrinks like the square root of the gap
        let s = solve_approx(&qp, &SolverOptions::default().with_epsilon(1e-12)).unwrap();
        assert!((s.z_star[0] + 1.0).abs() < 1e-5);
        assert!(rec.recover(&s.z_star)[0].abs() < 1e-5);
    }

    #[test]
    fn genbox_rejects_empty_interval() {
        let r = genbox_to_unitbox(&DenseMatrix::identity(1), &[0.0], &[1.0], &[1.0]);
        assert!(matches!(r, Err(Error::InvalidBounds { index: 0, .. })));
    }
}
