//! Work-rate driven oxygen uptake and CO2 production.

use crate::constants::{MOLAR_VOLUME_STP, M_O2};

/// Oxygen uptake [L/min STP] at external work rate `w` [W]:
/// VO2_rest + γW + βW².
pub fn vo2_of_work(w: f64, vo2_rest: f64, gamma: f64, beta: f64) -> f64 {
    vo2_rest + gamma * w + beta * w * w
}

/// O2 mass consumption [g/min] for a volumetric uptake [L/min STP].
pub fn o2_mass_rate_g_min(vo2_l_min: f64) -> f64 {
    vo2_l_min * M_O2 / MOLAR_VOLUME_STP
}

/// CO2 production [mol/min] from volumetric O2 uptake and the respiratory
/// exchange ratio.
pub fn co2_production(vo2_l_min: f64, rer: f64) -> f64 {
    rer * vo2_l_min / MOLAR_VOLUME_STP
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resting_uptake() {
        assert_eq!(vo2_of_work(0.0, 0.25, 5.8e-3, 4.0e-6), 0.25);
    }

    #[test]
    fn mass_conversion_factor() {
        // ṁ ≈ 1.43 · V̇O2 g/min.
        let ratio = o2_mass_rate_g_min(1.0);
        assert!((ratio - 1.43).abs() < 0.01, "got {ratio}");
    }

    #[test]
    fn peak_band_calibration() {
        // 0.25 + 2.90 + 1.00 = 4.15 L/min at 500 W.
        let v = vo2_of_work(500.0, 0.25, 5.8e-3, 4.0e-6);
        assert!((v - 4.15).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn co2_production_anchors() {
        // 1.52 L/min CO2 → 0.068 mol/min.
        let vo2 = 1.52 / 0.85;
        let n = co2_production(vo2, 0.85);
        assert!((n - 0.068).abs() < 2e-4, "got {n}");
        assert_eq!(co2_production(0.0, 0.85), 0.0);
        let n = co2_production(2.24, 1.0);
        assert!((n - 0.0999).abs() < 2e-4, "got {n}");
    }
}
