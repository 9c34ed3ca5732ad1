//! High-pressure O2 tank inventory with real-gas fill arithmetic.

use crate::constants::{M_O2, R_GAS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct O2Tank {
    /// Usable O2 mass remaining [kg].
    pub mass_kg: f64,
    /// Cylinder volume [L].
    pub volume_l: f64,
    /// Fill pressure [bar].
    pub fill_pressure_bar: f64,
    /// Compressibility factor at fill conditions.
    pub z: f64,
}

impl Default for O2Tank {
    fn default() -> Self {
        O2Tank {
            mass_kg: 3.0,
            volume_l: 11.7,
            fill_pressure_bar: 200.0,
            z: 0.95,
        }
    }
}

/// Moles of gas in a cylinder from the real-gas equation n = PV/(ZRT).
pub fn tank_fill_moles(p_pa: f64, v_m3: f64, z: f64, t_kelvin: f64) -> f64 {
    p_pa * v_m3 / (z * R_GAS * t_kelvin)
}

impl O2Tank {
    /// Total fill mass [kg] implied by the cylinder volume, fill pressure,
    /// and compressibility at temperature `t_kelvin`.
    pub fn fill_mass_kg(&self, t_kelvin: f64) -> f64 {
        tank_fill_moles(
            self.fill_pressure_bar * 1e5,
            self.volume_l * 1e-3,
            self.z,
            t_kelvin,
        ) * M_O2
            / 1000.0
    }
}
