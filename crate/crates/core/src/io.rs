//! JSON problem files and CSV trajectory writers.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apps::mpc::{LoopSample, AFTI16_PITCH_REF, AFTI16_X0};
use crate::apps::rkf::RkfRun;
use crate::linalg::DenseMatrix;
use crate::problem::{BoxQP, IterationTrace};
use crate::transforms::{genbox_to_unitbox, GenBoxRecovery, Kernel, LassoProblem, StrictQP, SvmProblem};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read input: {0}")]
    Read(#[from] std::io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Problem(#[from] crate::Error),
}

impl IoError {
    pub fn is_input_error(&self) -> bool {
        match self {
            IoError::Problem(e) => e.is_input_error(),
            IoError::Csv(_) => false,
            _ => true,
        }
    }

    /// The output stream was closed by its reader.
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            IoError::Read(e) => Some(e),
            IoError::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            _ => None,
        };
        io.is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    }
}

/// `{"n"?, "H", "h", "l"?, "u"?}`. Without bounds the box is `[−1, 1]ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxQpFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "H")]
    pub hess: DenseMatrix,
    pub h: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
}

impl BoxQpFile {
    /// The unit-box problem, plus the map back to `[l, u]` when bounds are given.
    pub fn into_problem(self) -> crate::Result<(BoxQP, Option<GenBoxRecovery>)> {
        if let Some(n) = self.n {
            if n != self.h.len() {
                return Err(crate::Error::Shape(format!("n = {n} but h has length {}", self.h.len())));
            }
        }
        match (self.l, self.u) {
            (None, None) => Ok((BoxQP::new(self.hess, self.h)?, None)),
            (l, u) => {
                let n = self.h.len();
                let l = l.unwrap_or_else(|| vec![-1.0; n]);
                let u = u.unwrap_or_else(|| vec![1.0; n]);
                let (p, rec) = genbox_to_unitbox(&self.hess, &self.h, &l, &u)?;
                Ok((p, Some(rec)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Penalty {
    Uniform(f64),
    PerRow(Vec<f64>),
}

/// `{"Q", "q", "G", "g", "rho"}`; `rho` is a scalar or one value per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrictQpFile {
    #[serde(rename = "Q")]
    pub q_mat: DenseMatrix,
    pub q: Vec<f64>,
    #[serde(rename = "G")]
    pub g_mat: DenseMatrix,
    pub g: Vec<f64>,
    pub rho: Penalty,
}

impl From<StrictQpFile> for StrictQP {
    fn from(f: StrictQpFile) -> Self {
        let rho = match f.rho {
            Penalty::Uniform(r) => vec![r; f.g.len()],
            Penalty::PerRow(v) => v,
        };
        StrictQP {
            q_mat: f.q_mat,
            q: f.q,
            g_mat: f.g_mat,
            g: f.g,
            rho,
        }
    }
}

/// `{"A", "b", "lambda"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LassoFile {
    #[serde(rename = "A")]
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub lambda: f64,
}

impl LassoFile {
    pub fn into_problem(self) -> crate::Result<LassoProblem> {
        LassoProblem::new(self.a, self.b, self.lambda)
    }
}

/// `{"X" | "gram", "y", "rho", "kernel"?}`. The kernel defaults to linear
/// and is ignored when a Gram matrix is supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmFile {
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<DenseMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<DenseMatrix>,
    pub y: Vec<f64>,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Kernel>,
}

impl SvmFile {
    pub fn into_problem(self) -> crate::Result<SvmProblem> {
        match (self.x, self.gram) {
            (Some(x), None) => SvmProblem::from_features(x, self.y, self.rho, self.kernel.unwrap_or(Kernel::Linear)),
            (None, Some(k)) => SvmProblem::from_gram(self.y, k, self.rho),
            _ => Err(crate::Error::Shape("exactly one of X and gram must be given".into())),
        }
    }
}

/// Closed-loop AFTI-16 run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcScenario {
    pub steps: usize,
    pub x0: Vec<f64>,
    /// Pitch-angle reference (second output); the first output tracks 0.
    pub pitch_ref: f64,
}

impl Default for MpcScenario {
    fn default() -> Self {
        Self {
            steps: 100,
            x0: AFTI16_X0.to_vec(),
            pitch_ref: AFTI16_PITCH_REF,
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>, R: Read>(mut reader: R) -> Result<T, IoError> {
    let mut buf = String::new();
    reader.read_to_string(&mut buf)?;
    Ok(serde_json::from_str(&buf)?)
}

pub fn read_json_file<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T, IoError> {
    read_json(std::fs::File::open(path)?)
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn numbered(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

/// Columns `t, x1…, y1…, r1…, u1…, qp_dim, gap, iters, rank1`.
pub fn write_mpc_csv<W: Write>(samples: &[LoopSample], out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let (nx, ny, nu) = samples
        .first()
        .map_or((0, 0, 0), |s| (s.x.len(), s.y.len(), s.u.len()));
    let mut header = vec!["t".to_string()];
    header.extend(numbered("x", nx));
    header.extend(numbered("y", ny));
    header.extend(numbered("r", ny));
    header.extend(numbered("u", nu));
    header.extend(["qp_dim", "gap", "iters", "rank1"].map(String::from));
    w.write_record(&header)?;
    for s in samples {
        let mut row = vec![s.t.to_string()];
        row.extend(s.x.iter().chain(&s.y).chain(&s.r).chain(&s.u).map(|v| fmt(*v)));
        row.extend([
            s.qp_dim.to_string(),
            fmt(s.duality_gap),
            s.iterations.to_string(),
            s.rank1.to_string(),
        ]);
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Columns `t, x_true1…, x_kf1…, x_rkf1…, u1…, gap, iters, rank1`, then two
/// footer rows (`t = rms_kf`, `t = rms_rkf`) carrying the per-state RMS error
/// in the matching estimate columns.
pub fn write_rkf_csv<W: Write>(run: &RkfRun, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let (nx, nu) = run.samples.first().map_or((0, 0), |s| (s.x_true.len(), s.u.len()));
    let mut header = vec!["t".to_string()];
    header.extend(numbered("x_true", nx));
    header.extend(numbered("x_kf", nx));
    header.extend(numbered("x_rkf", nx));
    header.extend(numbered("u", nu));
    header.extend(["gap", "iters", "rank1"].map(String::from));
    w.write_record(&header)?;
    for s in &run.samples {
        let mut row = vec![s.t.to_string()];
        row.extend(s.x_true.iter().chain(&s.x_kf).chain(&s.x_rkf).chain(&s.u).map(|v| fmt(*v)));
        row.extend([fmt(s.stats.duality_gap), s.stats.iterations.to_string(), s.stats.rank1.to_string()]);
        w.write_record(&row)?;
    }
    let blank = |k: usize| std::iter::repeat_n(String::new(), k);
    let mut kf = vec!["rms_kf".to_string()];
    kf.extend(blank(nx));
    kf.extend(run.rms_kf.iter().map(|v| fmt(*v)));
    kf.extend(blank(nx + nu + 3));
    w.write_record(&kf)?;
    let mut rkf = vec!["rms_rkf".to_string()];
    rkf.extend(blank(2 * nx));
    rkf.extend(run.rms_rkf.iter().map(|v| fmt(*v)));
    rkf.extend(blank(nu + 3));
    w.write_record(&rkf)?;
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One row per iteration with the fields of [`crate::problem::IterationRecord`].
pub fn write_iteration_csv<W: Write>(trace: &IterationTrace, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    for r in &trace.records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
