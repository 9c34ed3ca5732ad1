//! Thermochemistry of the net scrubbing reaction
//! CO2(g) + Ca(OH)2(s) -> CaCO3(s) + H2O(l).

use serde::{Deserialize, Serialize};

/// Standard enthalpies of formation at 298.15 K [kJ/mol].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoTable {
    pub dhf_co2_gas: f64,
    pub dhf_caoh2_solid: f64,
    pub dhf_caco3_solid: f64,
    pub dhf_h2o_liquid: f64,
}

impl Default for ThermoTable {
    fn default() -> Self {
        ThermoTable {
            dhf_co2_gas: -393.5,
            dhf_caoh2_solid: -986.1,
            dhf_caco3_solid: -1206.9,
            dhf_h2o_liquid: -285.8,
        }
    }
}

/// Hess's-law reaction enthalpy of the net scrubbing reaction [kJ/mol CO2].
/// Products (CaCO3 + H2O(l)) minus reactants (CO2 + Ca(OH)2); exothermic
/// values are negative.
pub fn reaction_enthalpy(table: &ThermoTable) -> f64 {
    (table.dhf_caco3_solid + table.dhf_h2o_liquid) - (table.dhf_co2_gas + table.dhf_caoh2_solid)
}
