//! Model predictive control and robust state estimation built on the
//! Box-QP solvers.

pub mod lti;
pub mod mpc;
pub mod rkf;

pub use lti::{expm, zoh_discretize, LtiModel};
pub use mpc::{afti16_setup, condense_mpc, mpc_step, simulate_closed_loop, MpcConfig, StageConstraints};
pub use rkf::{kf_predict, kf_update, rkf_update, rms_error, run_rkf_scenario, three_tank_setup, KfState, RkfConfig, RkfScenario};
