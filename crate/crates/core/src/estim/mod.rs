//! State estimation: extended Kalman filter over the plant model,
//! scrubber-health residual tracking, and seal-integrity detection.

mod ekf;
mod health;
mod seal;

pub use ekf::{min_eigenvalue, Ekf, Estimate, CHANNEL_NAMES, N_CHANNELS};
pub use health::ScrubberHealth;
pub use seal::{SealMonitor, SealStatus};
