//! Silica-gel desiccant equilibrium (GAB isotherm) and linear-driving-force
//! uptake kinetics.

use super::ChemError;
use crate::constants::R_GAS;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesiccantParams {
    /// GAB monolayer capacity at 25 °C [kg water / kg dry gel].
    pub q_m: f64,
    /// Guggenheim constant.
    pub c_g: f64,
    /// Multilayer correction factor, 0 < K_G < 1.
    pub k_g: f64,
    /// LDF mass-transfer coefficient [1/s].
    pub k_ldf: f64,
    /// Dry gel mass [kg].
    pub dry_mass_kg: f64,
    /// Saturation water capacity [kg].
    pub m_water_max_kg: f64,
    /// Enthalpy of adsorption [kJ/kg water].
    pub dh_ads_kj_per_kg: f64,
    /// Activation energy for the q_m(T) Arrhenius decline [J/mol], chosen
    /// so q_m drops ~40% between 25 °C and 50 °C.
    pub e_qm_j_per_mol: f64,
    /// Volumetric heat capacity of the desiccant bed [J m⁻³ K⁻¹].
    pub rho_cp_bed: f64,
    /// Desiccant bed volume [m³].
    pub v_bed: f64,
    /// Wall heat-loss coefficient [W/K].
    pub ua_wall: f64,
}

impl Default for DesiccantParams {
    fn default() -> Self {
        DesiccantParams {
            q_m: 0.10,
            c_g: 40.0,
            k_g: 0.85,
            k_ldf: 2.5e-3,
            dry_mass_kg: 1.0,
            m_water_max_kg: 0.35,
            dh_ads_kj_per_kg: 2550.0,
            e_qm_j_per_mol: 16_370.0,
            rho_cp_bed: 0.9e6,
            v_bed: 1.3e-3,
            ua_wall: 1.0,
        }
    }
}

/// GAB equilibrium loading [kg water / kg dry gel] at water activity `a_w`.
pub fn gab_loading(a_w: f64, q_m: f64, c_g: f64, k_g: f64) -> Result<f64, ChemError> {
    if a_w < 0.0 {
        return Err(ChemError::domain("a_w", a_w, ">= 0"));
    }
    let ka = k_g * a_w;
    if ka >= 1.0 {
        return Err(ChemError::domain("a_w", a_w, "< 1/K_G (denominator positive)"));
    }
    Ok(q_m * c_g * ka / ((1.0 - ka) * (1.0 - ka + c_g * ka)))
}

/// Temperature-corrected monolayer capacity: Arrhenius-type decline with
/// rising temperature, anchored at 25 °C.
pub fn monolayer_capacity_at(q_m_25: f64, e_qm_j_per_mol: f64, t_kelvin: f64) -> f64 {
    q_m_25 * (e_qm_j_per_mol / R_GAS * (1.0 / t_kelvin - 1.0 / 298.15)).exp()
}

/// Linear-driving-force uptake rate d(q̄)/dt [1/s in loading units]; the
/// sign tracks the driving force, so a bed wetter than equilibrium desorbs.
pub fn ldf_rate(q_bar: f64, q_e: f64, k_ldf: f64) -> f64 {
    k_ldf * (q_e - q_bar)
}
