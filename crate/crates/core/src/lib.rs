//! Core library for a deterministic semi-closed breathing-loop simulator:
//! scrubber and desiccant chemistry, gas-loop dynamics, physiology,
//! the coupled plant model, EKF state estimation, and the control stack
//! (LTV-MPC, CBF safety filter, PID baseline, mode management).

pub mod chem;
pub mod config;
pub mod constants;
pub mod control;
pub mod estim;
pub mod gas;
pub mod physio;
pub mod plant;

pub use config::Config;
