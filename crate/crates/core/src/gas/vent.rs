//! Exhaust-valve orifice flow and the O2 enrichment bookkeeping it drives.

use super::counterlung::{suit_pressure, VentParams};

/// Molar vent rate [mol/s] through the exhaust valve: subsonic orifice law
/// with a cracking threshold, exactly zero at or below cracking pressure.
pub fn vent_rate(p_s: f64, rho_s: f64, mean_molar_mass: f64, params: &VentParams) -> f64 {
    let dp = (p_s - params.p_crack).max(0.0);
    params.c_d * params.a_v / mean_molar_mass * (2.0 * rho_s * dp).sqrt()
}

/// Overpressure scale regularizing the orifice law's square-root kink in
/// the integrated plant model, bounding its slope at the cracking point so
/// finite-difference linearizations stay finite. The pointwise `vent_rate`
/// op keeps the exact law.
pub const VENT_REG_PA: f64 = 15.0;

fn vent_rate_smooth(p_s: f64, rho_s: f64, mean_molar_mass: f64, params: &VentParams) -> f64 {
    let dp = (p_s - params.p_crack).max(0.0);
    params.c_d * params.a_v / mean_molar_mass * (2.0 * rho_s).sqrt() * dp
        / (dp + VENT_REG_PA).sqrt()
}

/// Vent rate averaged over one oscillation of the counter-lung volume
/// (tidal breathing plus movement), V(θ) = v_cl + amp·sin θ. The orifice
/// law rectifies the oscillation: peaks that cross the cracking threshold
/// vent even when the mean volume sits below it.
pub fn phase_averaged_vent(
    v_cl: f64,
    osc_amplitude_l: f64,
    p_ambient: f64,
    rho_s: f64,
    mean_molar_mass: f64,
    params: &VentParams,
) -> f64 {
    if osc_amplitude_l < 1e-9 {
        let p_s = suit_pressure(v_cl, p_ambient, params);
        return vent_rate_smooth(p_s, rho_s, mean_molar_mass, params);
    }
    // 16-point midpoint rule over the phase; deterministic in v_cl.
    const N: usize = 16;
    let mut acc = 0.0;
    for k in 0..N {
        let theta = (k as f64 + 0.5) / N as f64 * std::f64::consts::TAU;
        let v = v_cl + osc_amplitude_l * theta.sin();
        let p_s = suit_pressure(v, p_ambient, params);
        acc += vent_rate_smooth(p_s, rho_s, mean_molar_mass, params);
    }
    acc / N as f64
}

/// Simplified enrichment rate dx_O2/dt [1/min] under the pressure-holding
/// approximation: (n_vent/n_total)(1 − x_O2).
pub fn enrichment_rate(x_o2: f64, n_vent_mol_min: f64, n_total: f64) -> f64 {
    n_vent_mol_min / n_total * (1.0 - x_o2)
}

/// Minutes to enrich from `x_from` to `x_to` at a sustained vent rate,
/// using the instantaneous rate at the starting fraction.
pub fn enrichment_crossing_time(
    x_from: f64,
    x_to: f64,
    n_vent_mol_min: f64,
    n_total: f64,
) -> f64 {
    (x_to - x_from) / enrichment_rate(x_from, n_vent_mol_min, n_total)
}

/// Peak mole-fraction excursion from one unmixed PWM bolus of `dn` moles
/// of pure O2 into a loop of `n_total` moles at fraction `x_o2`.
pub fn bolus_fraction_unmixed(dn: f64, n_total: f64, x_o2: f64) -> f64 {
    dn / (n_total + dn) * (1.0 - x_o2)
}

/// Breathing-zone fluctuation for a mixed bolus: dn/n_total · (1 − x_O2).
pub fn bolus_fraction_mixed(dn: f64, n_total: f64, x_o2: f64) -> f64 {
    dn / n_total * (1.0 - x_o2)
}
