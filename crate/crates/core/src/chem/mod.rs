//! Scrubber and desiccant physical chemistry: thermochemistry, kinetics,
//! stoichiometric capacity, adsorption isotherms, packed-bed flow
//! resistance, and bed thermal balances.

mod bed;
mod desiccant;
mod scrubber;
mod thermo;

pub use bed::{ergun_dp_per_length, swelling_ratio, void_fraction, viscous_resistance_ratio};
pub use desiccant::{gab_loading, ldf_rate, monolayer_capacity_at, DesiccantParams};
pub use scrubber::{
    bed_removal_rate, bed_temp_rhs, effectiveness, min_circulation, ntu_required, scrub_capacity,
    scrub_rate, ScrubberParams,
};
pub use thermo::{reaction_enthalpy, ThermoTable};

use thiserror::Error;

/// Domain errors for chemistry operations: inputs outside the physically
/// meaningful range of the underlying model.
#[derive(Debug, Error, PartialEq)]
pub enum ChemError {
    #[error("{name} = {value} is outside its valid domain ({constraint})")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

impl ChemError {
    pub(crate) fn domain(name: &'static str, value: f64, constraint: &'static str) -> Self {
        ChemError::Domain {
            name,
            value,
            constraint,
        }
    }
}
