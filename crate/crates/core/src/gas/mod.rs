//! Suit pressure algebra, exhaust-valve venting, counter-lung dynamics,
//! O2 enrichment bookkeeping, tank inventory, and the O2 valve
//! stiction/PWM actuator model.

mod counterlung;
mod inventory;
mod tank;
mod valve;
mod vent;

pub use counterlung::{counterlung_rhs, suit_pressure, VentParams};
pub use inventory::GasInventory;
pub use tank::{tank_fill_moles, O2Tank};
pub use valve::{valve_flow, FlowMode, PwmPlan, PwmPlanner, ValveModel};
pub use vent::{
    bolus_fraction_mixed, bolus_fraction_unmixed, enrichment_crossing_time, enrichment_rate,
    phase_averaged_vent, vent_rate,
};
