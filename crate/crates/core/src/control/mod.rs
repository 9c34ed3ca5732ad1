//! The decision stack: LTV-MPC with the resource-scarcity cost, the CBF
//! safety filter, the PID baseline, the scripted fallback policy, thermal
//! threat assessment, and mode management — each controller variant behind
//! the [`Controller`] trait in a name-keyed registry.

mod cbf;
mod fallback;
mod linearize;
mod mode;
mod mpc;
mod pid;
mod qp;
mod registry;
mod threat;

pub use cbf::{barriers, cbf_filter, CbfOutcome, BARRIER_NAMES, N_BARRIERS};
pub use fallback::fallback_policy;
pub use linearize::{
    linearize, zoh_affine, zoh_discretize, AffineModel, DiscreteModel, LinearizeError, ZohError,
};
pub use mode::{Mode, ModeInputs, ModeManager, CASCADE_TRIAGE};
pub use mpc::{
    build_prediction, mpc_cost_terms, scarcity_lambda, CostTerms, LtvPrediction, MpcController,
    MpcSolve, MpcStatus,
};
pub use pid::PidBaseline;
pub use qp::{solve_qp, QpOptions, QpSolution, QpStatus};
pub use registry::{
    ControlContext, Controller, ControllerRegistry, Decision, MpcStrategy, PidStrategy,
    SolverStatus,
};
pub use threat::{lambda_with_relief, thermal_threat};
