//! Soda-lime scrubber kinetics, capacity, sizing relations, and the bed
//! thermal balance.

use super::ChemError;
use crate::constants::{CP_AIR, M_CAOH2, M_CO2, R_GAS, R_L_ATM};
use serde::{Deserialize, Serialize};

/// Scrubber bed parameters. `k_ov_as_vbed` is the lumped product
/// k_ov·a_s·V_bed [mol s⁻¹ Pa⁻¹]; mass-transfer enhancement is folded in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScrubberParams {
    /// Lumped k_ov·a_s·V_bed [mol s⁻¹ Pa⁻¹].
    pub k_ov_as_vbed: f64,
    /// Bed volume [m³].
    pub v_bed: f64,
    /// Dry mass fraction of the as-packed sorbent.
    pub f_dry: f64,
    /// Ca(OH)2 fraction of the dry mass.
    pub f_caoh2: f64,
    /// Initial void fraction.
    pub eps0: f64,
    /// Water retention fraction χ_w of reaction water staying in the bed.
    pub chi_w: f64,
    /// Granule diameter [m].
    pub d_p: f64,
    /// Bed length [m].
    pub l_bed: f64,
    /// Volumetric heat capacity (ρ c_p)_bed [J m⁻³ K⁻¹].
    pub rho_cp_bed: f64,
    /// Wall heat-loss coefficient U·A_wall [W/K].
    pub ua_wall: f64,
    /// Equilibrium CO2 back-pressure over the sorbent [Pa].
    pub p_co2_eq: f64,
    /// Shrinking-core exponent in η(ξ) = (1−ξ)^p.
    pub effectiveness_exponent: f64,
    /// As-packed soda-lime mass [kg].
    pub sorbent_mass_kg: f64,
}

impl Default for ScrubberParams {
    fn default() -> Self {
        ScrubberParams {
            k_ov_as_vbed: 4.0e-5,
            v_bed: 1.1e-3,
            f_dry: 0.82,
            f_caoh2: 0.77,
            eps0: 0.40,
            chi_w: 0.4,
            d_p: 3.0e-3,
            l_bed: 0.12,
            rho_cp_bed: 1.35e6,
            ua_wall: 1.0,
            p_co2_eq: 0.0,
            effectiveness_exponent: 1.5,
            sorbent_mass_kg: 1.0,
        }
    }
}

impl ScrubberParams {
    /// Initial Ca(OH)2 inventory [kg].
    pub fn caoh2_initial_kg(&self) -> f64 {
        self.f_dry * self.f_caoh2 * self.sorbent_mass_kg
    }
}

/// Maximum CO2 uptake [g] of `mass_kg` of soda lime via 1:1 stoichiometry.
pub fn scrub_capacity(mass_kg: f64, f_dry: f64, f_caoh2: f64) -> Result<f64, ChemError> {
    if mass_kg < 0.0 {
        return Err(ChemError::domain("mass_kg", mass_kg, ">= 0"));
    }
    for (name, v) in [("f_dry", f_dry), ("f_caoh2", f_caoh2)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(ChemError::domain(name, v, "in [0, 1]"));
        }
    }
    Ok(f_dry * f_caoh2 * (mass_kg * 1000.0) / M_CAOH2 * M_CO2)
}

/// Overall volumetric CO2 removal rate [mol/s] from the lumped
/// mass-transfer law; the driving force clamps at zero.
pub fn scrub_rate(
    p_co2: f64,
    p_co2_eq: f64,
    eta: f64,
    k_ov_as_vbed: f64,
    phi_bypass: f64,
) -> f64 {
    (1.0 - phi_bypass) * k_ov_as_vbed * (p_co2 - p_co2_eq).max(0.0) * eta
}

/// Effectiveness factor η(ξ): shrinking-core form (1−ξ)^p with η(0)=1,
/// η(1)=0, monotone non-increasing in the conversion fraction.
pub fn effectiveness(xi: f64, exponent: f64) -> Result<f64, ChemError> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(ChemError::domain("xi", xi, "in [0, 1]"));
    }
    Ok((1.0 - xi).powf(exponent))
}

/// Single-pass bed removal rate [mol/s] for a plug-flow bed fed with flow
/// `q_m3s` [m³/s] at CO2 partial pressure `p_co2` [Pa]. The removal
/// fraction is 1 − exp(−NTU) with NTU = k_ov·a_s·V_bed·η·R·T/Q; in the
/// well-circulated limit this recovers `scrub_rate`.
pub fn bed_removal_rate(
    p_co2: f64,
    p_co2_eq: f64,
    eta: f64,
    k_ov_as_vbed: f64,
    q_m3s: f64,
    t_kelvin: f64,
) -> f64 {
    let drive = (p_co2 - p_co2_eq).max(0.0);
    if q_m3s <= 0.0 || drive <= 0.0 || eta <= 0.0 {
        return 0.0;
    }
    let ntu = k_ov_as_vbed * eta * R_GAS * t_kelvin / q_m3s;
    let molar_feed = q_m3s * drive / (R_GAS * t_kelvin);
    molar_feed * (1.0 - (-ntu).exp())
}

/// Number of transfer units demanded by an inlet/outlet/equilibrium
/// partial-pressure triple.
pub fn ntu_required(p_in: f64, p_out: f64, p_eq: f64) -> Result<f64, ChemError> {
    if p_out <= p_eq {
        return Err(ChemError::domain("p_out", p_out, "> p_eq"));
    }
    if p_in < p_out {
        return Err(ChemError::domain("p_in", p_in, ">= p_out"));
    }
    Ok(((p_in - p_eq) / (p_out - p_eq)).ln())
}

/// Minimum loop circulation [L/min] needed to hold the loop CO2 partial
/// pressure at `p_co2_max` [atm] against a production rate
/// `n_dot_co2` [mol/min], with scrubber outlet at `p_out` [atm].
pub fn min_circulation(
    n_dot_co2_mol_min: f64,
    t_kelvin: f64,
    p_co2_max_atm: f64,
    p_out_atm: f64,
) -> Result<f64, ChemError> {
    if p_co2_max_atm <= p_out_atm {
        return Err(ChemError::domain("p_co2_max", p_co2_max_atm, "> p_out"));
    }
    Ok(n_dot_co2_mol_min * R_L_ATM * t_kelvin / (p_co2_max_atm - p_out_atm))
}

/// Rate of change of the scrubber bed temperature [K/s] from the energy
/// balance: reaction heat in, convective removal by the gas stream, and
/// wall losses.
#[allow(clippy::too_many_arguments)]
pub fn bed_temp_rhs(
    t_bed_c: f64,
    q_scrub_w: f64,
    m_dot_air_kg_s: f64,
    t_air_in_c: f64,
    t_wall_c: f64,
    rho_cp_bed: f64,
    v_bed: f64,
    ua_wall: f64,
) -> f64 {
    let convective = m_dot_air_kg_s * CP_AIR * (t_bed_c - t_air_in_c);
    let wall = ua_wall * (t_bed_c - t_wall_c);
    (q_scrub_w - convective - wall) / (rho_cp_bed * v_bed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::reaction_enthalpy;
    use crate::chem::ThermoTable;

    #[test]
    fn capacity_matches_stoichiometry() {
        // 0.82 · 0.77 · 1000 g / 74.09 · 44.01 = 375.06 g
        let g = scrub_capacity(1.0, 0.82, 0.77).unwrap();
        assert!((g - 375.0).abs() < 0.5, "got {g}");
        assert_eq!(scrub_capacity(0.0, 0.5, 0.5).unwrap(), 0.0);
        // Linear in mass.
        let g2 = scrub_capacity(2.0, 0.82, 0.77).unwrap();
        assert!((g2 - 2.0 * g).abs() < 1e-9);
        assert!((g2 - 750.2).abs() < 0.5, "got {g2}");
        assert!(scrub_capacity(-1.0, 0.82, 0.77).is_err());
        assert!(scrub_capacity(1.0, 1.2, 0.77).is_err());
    }

    #[test]
    fn scrub_rate_basics() {
        assert_eq!(scrub_rate(500.0, 500.0, 1.0, 2.3e-6, 0.0), 0.0);
        assert_eq!(scrub_rate(500.0, 0.0, 0.0, 2.3e-6, 0.0), 0.0);
        let r = scrub_rate(500.0, 0.0, 1.0, 2.3e-6, 0.0);
        assert!((r - 1.15e-3).abs() < 1e-12, "got {r}");
        // Negative driving force clamps to zero.
        assert_eq!(scrub_rate(100.0, 500.0, 1.0, 2.3e-6, 0.0), 0.0);
        // Non-increasing in bypass fraction and in lost effectiveness.
        assert!(scrub_rate(500.0, 0.0, 1.0, 2.3e-6, 0.5) < r);
        assert!(scrub_rate(500.0, 0.0, 0.5, 2.3e-6, 0.0) < r);
    }

    #[test]
    fn effectiveness_endpoints_and_midpoint() {
        assert_eq!(effectiveness(0.0, 1.5).unwrap(), 1.0);
        assert_eq!(effectiveness(1.0, 1.5).unwrap(), 0.0);
        let e = effectiveness(0.5, 1.5).unwrap();
        assert!((e - 0.5f64.powf(1.5)).abs() < 1e-15);
        assert!((e - 0.3536).abs() < 5e-4, "got {e}");
        assert!(effectiveness(-0.1, 1.5).is_err());
        assert!(effectiveness(1.1, 1.5).is_err());
    }

    #[test]
    fn effectiveness_monotone_non_increasing() {
        let mut last = f64::INFINITY;
        for i in 0..=1000 {
            let xi = i as f64 / 1000.0;
            let e = effectiveness(xi, 1.5).unwrap();
            assert!(e <= last + 1e-15);
            last = e;
        }
    }

    #[test]
    fn bed_removal_recovers_lumped_rate_in_fast_flow_limit() {
        let k = 5.6e-6;
        let lumped = scrub_rate(200.0, 0.0, 1.0, k, 0.0);
        let r = bed_removal_rate(200.0, 0.0, 1.0, k, 10.0, 308.15);
        assert!((r - lumped).abs() / lumped < 1e-3, "r={r} lumped={lumped}");
        // Flow-limited regime: removal bounded by molar feed.
        let slow = bed_removal_rate(200.0, 0.0, 1.0, k, 1e-4, 308.15);
        let feed = 1e-4 * 200.0 / (R_GAS * 308.15);
        assert!(slow <= feed && slow > 0.9 * feed);
    }

    #[test]
    fn ntu_and_min_circulation() {
        assert_eq!(ntu_required(100.0, 100.0, 0.0).unwrap(), 0.0);
        let one = ntu_required(std::f64::consts::E, 1.0, 0.0).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        assert!(ntu_required(100.0, 0.0, 0.0).is_err());
        assert!(ntu_required(10.0, 20.0, 0.0).is_err());

        let q = min_circulation(0.068, 308.0, 0.005, 0.0).unwrap();
        assert!((q - 344.0).abs() < 1.0, "got {q}");
        assert!(min_circulation(0.068, 308.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn bed_temp_rhs_balances() {
        let p = ScrubberParams::default();
        let rhs = bed_temp_rhs(40.0, 0.0, 5.0e-3, 40.0, 40.0, p.rho_cp_bed, p.v_bed, p.ua_wall);
        assert_eq!(rhs, 0.0);

        // Heat inputs at heavy exertion, from the reaction enthalpy and the
        // anchor scrubbing rate of 0.068 mol/min.
        let dh = reaction_enthalpy(&ThermoTable::default()).abs(); // kJ/mol
        let q_scrub = dh * 1000.0 * 0.068 / 60.0;
        assert!((q_scrub - 128.0).abs() < 2.0, "got {q_scrub}");
        let q_ads: f64 = 2550.0e3 * 4.2e-3 / 60.0 / 1000.0 * 1000.0;
        assert!((q_ads - 179.0).abs() < 3.0, "got {q_ads}");

        // Positive heat input with no sinks warms the bed.
        let warm = bed_temp_rhs(40.0, q_scrub, 0.0, 40.0, 40.0, p.rho_cp_bed, p.v_bed, 0.0);
        assert!(warm > 0.0);
    }
}
