use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Discrete-time `x⁺ = Ax + Bu`, `y = Cx` sampled every `ts` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtiModel {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub c: DenseMatrix,
    pub ts: f64,
}

impl LtiModel {
    pub fn new(a: DenseMatrix, b: DenseMatrix, c: DenseMatrix, ts: f64) -> Result<Self> {
        let nx = a.rows();
        if !a.is_square() {
            return Err(Error::Shape(format!("A is {}x{}", a.rows(), a.cols())));
        }
        if b.rows() != nx {
            return Err(Error::Shape(format!("B has {} rows, expected {nx}", b.rows())));
        }
        if c.cols() != nx {
            return Err(Error::Shape(format!("C has {} columns, expected {nx}", c.cols())));
        }
        Ok(Self { a, b, c, ts })
    }

    pub fn nx(&self) -> usize {
        self.a.rows()
    }

    pub fn nu(&self) -> usize {
        self.b.cols()
    }

    pub fn ny(&self) -> usize {
        self.c.rows()
    }

    pub fn step(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut next = crate::linalg::matvec(&self.a, x).expect("shape checked");
        let bu = crate::linalg::matvec(&self.b, u).expect("shape checked");
        for (v, w) in next.iter_mut().zip(&bu) {
            *v += w;
        }
        next
    }

    pub fn output(&self, x: &[f64]) -> Vec<f64> {
        crate::linalg::matvec(&self.c, x).expect("shape checked")
    }
}

fn norm1(m: &DenseMatrix) -> f64 {
    (0..m.cols())
        .map(|c| (0..m.rows()).map(|r| m[(r, c)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring around a degree-6 Taylor
/// polynomial. The argument is scaled until its 1-norm is at most 1/32.
pub fn expm(m: &DenseMatrix) -> DenseMatrix {
    let n = m.rows();
    let norm = norm1(m);
    let squarings = if norm > 1.0 / 32.0 {
        (norm * 32.0).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m.scaled(0.5f64.powi(squarings));
    // Horner: I + X(I + X/2(I + X/3(… (I + X/6))))
    let mut acc = DenseMatrix::identity(n);
    for k in (1..=6).rev() {
        let mut next = scaled.matmul(&acc).expect("square").scaled(1.0 / k as f64);
        next.add_diag(&vec![1.0; n]);
        acc = next;
    }
    for _ in 0..squarings {
        acc = acc.matmul(&acc).expect("square");
    }
    acc
}

/// Zero-order-hold discretization via `exp([[Ac, Bc], [0, 0]]·ts)`.
pub fn zoh_discretize(ac: &DenseMatrix, bc: &DenseMatrix, ts: f64) -> Result<(DenseMatrix, DenseMatrix)> {
    let nx = ac.rows();
    let nu = bc.cols();
    if !ac.is_square() || bc.rows() != nx {
        return Err(Error::Shape(format!(
            "Ac is {}x{} and Bc is {}x{}",
            ac.rows(),
            ac.cols(),
            bc.rows(),
            bc.cols()
        )));
    }
    if !(ts > 0.0) {
        return Err(Error::Shape(format!("sampling time {ts} must be positive")));
    }
    let aug = DenseMatrix::from_fn(nx + nu, nx + nu, |r, c| match (r < nx, c < nx) {
        (true, true) => ac[(r, c)] * ts,
        (true, false) => bc[(r, c - nx)] * ts,
        _ => 0.0,
    });
    let e = expm(&aug);
    let a = DenseMatrix::from_fn(nx, nx, |r, c| e[(r, c)]);
    let b = DenseMatrix::from_fn(nx, nu, |r, c| e[(r, nx + c)]);
    Ok((a, b))
}
