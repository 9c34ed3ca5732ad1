//! Metabolic demand, heart-rate and core-temperature dynamics, oxygen
//! toxicity dose, wet-basis inspired O2, and risk indices.

mod heart;
mod metabolism;
mod oxygen;
mod risk;

pub use heart::{core_temp_rhs, hr_components, hr_rhs, work_from_hr, HrComponents};
pub use metabolism::{co2_production, o2_mass_rate_g_min, vo2_of_work};
pub use oxygen::{pio2_wet, saturation_pressure, uptd_rate};
pub use risk::{risk_indices, RiskIndices};

use serde::{Deserialize, Serialize};

/// Subject and thermal-model parameters for the physiology stack.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetabolicParams {
    /// Resting O2 uptake [L/min STP].
    pub vo2_rest: f64,
    /// Linear work coefficient γ [L min⁻¹ W⁻¹].
    pub gamma: f64,
    /// Quadratic work coefficient β [L min⁻¹ W⁻²].
    pub beta: f64,
    /// Respiratory exchange ratio R.
    pub rer: f64,
    /// Heart-rate first-order lag [s].
    pub tau_hr: f64,
    /// Resting heart rate [bpm].
    pub hr_rest: f64,
    /// Work component slope [bpm/W].
    pub hr_per_watt: f64,
    /// Heart-rate ceiling [bpm].
    pub hr_max: f64,
    /// Heat-strain slope on relative humidity above 50% [bpm per %RH].
    pub hr_per_rh: f64,
    /// Heat-strain slope on estimated core temperature above 37.5 °C [bpm/°C].
    pub hr_per_core: f64,
    /// Hypoxic component gain [bpm] at the 0.16 atm hard floor.
    pub hr_hypox_gain: f64,
    /// Hypoxic activation onset in O2-fraction-equivalent atm.
    pub hypox_onset_atm: f64,
    /// Hypoxic ramp width [atm].
    pub hypox_width_atm: f64,
    /// Work-rate estimator lag [s].
    pub tau_w_hat: f64,
    /// VO2 estimator lag [s].
    pub tau_vo2_hat: f64,
    /// Core thermal capacitance [J/K].
    pub c_core: f64,
    /// Basal metabolic heat [W].
    pub q_basal: f64,
    /// Metabolic heat per watt of external work.
    pub heat_per_watt: f64,
    /// Respiratory heat loss per L/min of VO2 [W min / L].
    pub resp_loss_per_vo2: f64,
    /// Baseline core-to-suit conductance [W/K].
    pub u_skin_base: f64,
    /// Vasodilation / sweat conductance slope above the threshold [W/K/°C].
    pub u_skin_slope: f64,
    /// Vasodilation threshold [°C].
    pub vasodilation_onset_c: f64,
    /// Kalman correction gain on the torso channel [W/K].
    pub k_tc: f64,
    /// Nominal core-to-torso temperature offset [°C].
    pub core_torso_offset_c: f64,
}

impl Default for MetabolicParams {
    fn default() -> Self {
        MetabolicParams {
            vo2_rest: 0.25,
            gamma: 5.8e-3,
            beta: 4.0e-6,
            rer: 0.85,
            tau_hr: 30.0,
            hr_rest: 70.0,
            hr_per_watt: 0.32,
            hr_max: 240.0,
            hr_per_rh: 0.3,
            hr_per_core: 12.0,
            hr_hypox_gain: 15.0,
            hypox_onset_atm: 0.18,
            hypox_width_atm: 0.02,
            tau_w_hat: 20.0,
            tau_vo2_hat: 15.0,
            c_core: 2.78e5,
            q_basal: 105.0,
            heat_per_watt: 1.2,
            resp_loss_per_vo2: 8.0,
            u_skin_base: 10.0,
            u_skin_slope: 80.0,
            vasodilation_onset_c: 37.0,
            k_tc: 20.0,
            core_torso_offset_c: 3.5,
        }
    }
}
