//! Counter-lung volume dynamics and the algebraic suit-pressure relation.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VentParams {
    /// Valve discharge coefficient.
    pub c_d: f64,
    /// Effective orifice area [m²].
    pub a_v: f64,
    /// Cracking pressure [Pa absolute].
    pub p_crack: f64,
    /// Counter-lung stiffness [Pa/L].
    pub k_cl: f64,
    /// Neutral counter-lung volume [L].
    pub v_cl0: f64,
    /// Minimum counter-lung volume for tidal breathing [L].
    pub v_cl_min: f64,
    /// Maximum counter-lung volume [L].
    pub v_cl_max: f64,
}

impl Default for VentParams {
    fn default() -> Self {
        VentParams {
            c_d: 0.6,
            a_v: 1.0e-4,
            p_crack: 101_325.0 + 500.0,
            k_cl: 100.0,
            v_cl0: 4.0,
            v_cl_min: 1.5,
            v_cl_max: 10.0,
        }
    }
}

impl VentParams {
    /// Counter-lung volume [L] at which the exhaust valve starts to open,
    /// given the ambient pressure [Pa].
    pub fn vent_threshold_volume(&self, p_ambient: f64) -> f64 {
        self.v_cl0 + (self.p_crack - p_ambient) / self.k_cl
    }
}

/// Suit absolute pressure [Pa] from the counter-lung elastic restoring
/// force: P_s = P_a + k_CL (V_CL − V_CL0).
pub fn suit_pressure(v_cl: f64, p_ambient: f64, params: &VentParams) -> f64 {
    p_ambient + params.k_cl * (v_cl - params.v_cl0)
}

/// Counter-lung volume rate [L/s]: net molar change at suit conditions,
/// thermal expansion of the loop gas, and the tidal breathing flow.
#[allow(clippy::too_many_arguments)]
pub fn counterlung_rhs(
    t_suit_kelvin: f64,
    p_s: f64,
    n_dot_inject: f64,
    n_dot_consumed: f64,
    n_dot_vent: f64,
    v_gas_l: f64,
    dt_suit_dt: f64,
    v_breath_dot_l_s: f64,
) -> f64 {
    let r_pa_l = crate::constants::R_GAS * 1000.0; // Pa·L / (mol·K)
    let molar = r_pa_l * t_suit_kelvin / p_s * (n_dot_inject - n_dot_consumed - n_dot_vent);
    let thermal = v_gas_l / t_suit_kelvin * dt_suit_dt;
    molar + thermal + v_breath_dot_l_s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ATM_PA;

    #[test]
    fn suit_pressure_algebra() {
        let p = VentParams::default();
        assert_eq!(suit_pressure(p.v_cl0, ATM_PA, &p), ATM_PA);
        let ps = suit_pressure(p.v_cl0 + 2.0, ATM_PA, &p);
        assert_eq!(ps, ATM_PA + 200.0);
        // Vent threshold volume: V_CL0 + (P_crack − P_a)/k_CL.
        let v_thr = p.vent_threshold_volume(ATM_PA);
        assert!((v_thr - (p.v_cl0 + 5.0)).abs() < 1e-12);
        assert!(suit_pressure(v_thr, ATM_PA, &p) >= p.p_crack);
    }

    #[test]
    fn counterlung_balance_terms() {
        // Balanced molar terms, isothermal, no breathing.
        let rhs = counterlung_rhs(308.0, ATM_PA, 1e-3, 5e-4, 5e-4, 100.0, 0.0, 0.0);
        assert!(rhs.abs() < 1e-15);

        // Pure thermal expansion: 100 L at 308 K warming 0.1 K/s.
        let rhs = counterlung_rhs(308.0, ATM_PA, 0.0, 0.0, 0.0, 100.0, 0.1, 0.0);
        assert!((rhs - 100.0 / 308.0 * 0.1).abs() < 1e-12);
        assert!((rhs - 0.0325).abs() < 1e-4, "got {rhs}");

        // Injection surplus of 1e-3 mol/s at 1 atm, 308 K.
        let rhs = counterlung_rhs(308.0, ATM_PA, 1e-3, 0.0, 0.0, 100.0, 0.0, 0.0);
        assert!((rhs - 0.0253).abs() < 1e-4, "got {rhs}");
    }
}
