//! The coupled 18-state plant: RHS assembly, RK4 integration with
//! conservation audits, and sensor-frame synthesis.

mod integrate;
mod model;
mod sense;
mod state;

pub use integrate::{rk4_step, FlowAudit, StepDiag};
pub use model::{initial_state, Flows, Observables, PlantError, PlantModel};
pub use sense::{
    median_vote, sense, O2CellFault, RngStreams, SensorFaults, SensorFrame, VoteResult,
};
pub use state::{idx, ControlInput, Disturbance, PlantState, CONTROL_DIM, STATE_DIM, STATE_NAMES};
