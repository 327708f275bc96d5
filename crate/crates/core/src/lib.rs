//! Dense Box-QP solvers with data-independent execution-time certificates.
//!
//! The canonical problem is
//!
//! ```text
//!     minimize    ½ zᵀ H z + hᵀ z
//!     subject to  −1 ≤ z ≤ 1
//! ```
//!
//! with `H` symmetric positive semidefinite. Two feasible path-following
//! interior-point solvers are provided:
//!
//! - [`solve_exact`]: exact Newton step, one Cholesky factorization per
//!   iteration, O(n^3.5) overall.
//! - [`solve_approx`]: approximated Newton step that keeps the inverse of the
//!   Newton matrix current with Sherman–Morrison rank-1 updates, O(n^3)
//!   overall.
//!
//! Both run a fixed iteration count that depends only on `n` and the target
//! duality gap; see [`certificate`]. [`transforms`] reduces strictly convex
//! QPs (via an exact ℓ1 penalty), Lasso, soft-margin SVM, and general boxes
//! to the canonical form, and [`apps`] contains an MPC and a robust Kalman
//! filter built on top.
//!
//! ```
//! use certiqp::{solve_approx, BoxQP, DenseMatrix, SolverOptions};
//!
//! let p = BoxQP::new(DenseMatrix::identity(2), vec![2.0, 0.5]).unwrap();
//! let sol = solve_approx(&p, &SolverOptions::default()).unwrap();
//! assert!((sol.z_star[0] + 1.0).abs() < 1e-5);
//! assert!((sol.z_star[1] + 0.5).abs() < 1e-5);
//! assert_eq!(sol.iterations_run, sol.certificate.unwrap().n_iter);
//! ```

pub mod apps;
pub mod approx;
pub mod certificate;
pub mod error;
pub mod exact;
pub mod harness;
pub mod io;
mod ipm;
pub mod linalg;
pub mod problem;
pub mod transforms;

pub use approx::{solve_approx, ApproxState, IndexSets, RankOneLog};
pub use certificate::{certify, Algorithm, Certificate};
pub use error::{Error, Result};
pub use exact::{exact_direction, solve_exact};
pub use linalg::{CholeskyFactor, DenseMatrix};
pub use problem::{BoxQP, Direction, Iterate, ScaledProblem, Scaling, Solution, SolverOptions};

/// Dispatches to the solver named by `algorithm`.
pub fn solve(p: &BoxQP, algorithm: Algorithm, opts: &SolverOptions) -> Result<Solution> {
    match algorithm {
        Algorithm::Exact => solve_exact(p, opts),
        Algorithm::Approx => solve_approx(p, opts),
    }
}
