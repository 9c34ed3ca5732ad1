//! Wet-basis inspired O2 partial pressure and the pulmonary oxygen
//! toxicity dose law.

use crate::constants::{kelvin, ATM_PA};

// Two-point exponential fit P_sat = exp(A − B/T) anchored at 42 mmHg
// (35 °C) and 47 mmHg (37 °C).
const ANCHOR_LO: (f64, f64) = (308.15, 42.0 * crate::constants::MMHG_PA);
const ANCHOR_HI: (f64, f64) = (310.15, 47.0 * crate::constants::MMHG_PA);

/// Saturation vapor pressure of water [Pa] at `t_celsius`.
pub fn saturation_pressure(t_celsius: f64) -> f64 {
    let b = (ANCHOR_HI.1 / ANCHOR_LO.1).ln() / (1.0 / ANCHOR_LO.0 - 1.0 / ANCHOR_HI.0);
    let a = ANCHOR_LO.1.ln() + b / ANCHOR_LO.0;
    (a - b / kelvin(t_celsius)).exp()
}

/// Inspired O2 partial pressure [atm] on a wet-gas basis:
/// (P_s − P_H2O(T_bz, RH)) · x_O2.
pub fn pio2_wet(p_s_pa: f64, t_bz_celsius: f64, rh_percent: f64, x_o2: f64) -> f64 {
    let p_h2o = saturation_pressure(t_bz_celsius) * (rh_percent / 100.0).clamp(0.0, 1.0);
    (p_s_pa - p_h2o).max(0.0) * x_o2 / ATM_PA
}

/// Oxygen-toxicity dose accumulation rate [1/s]: the minute-based power law
/// divided by 60, active only above 0.5 atm inspired O2.
pub fn uptd_rate(p_io2_atm: f64) -> f64 {
    if p_io2_atm > 0.5 {
        ((p_io2_atm - 0.5) / 0.5).powf(0.83) / 60.0
    } else {
        0.0
    }
}
