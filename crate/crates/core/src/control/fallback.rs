//! Scripted fallback policy: mode-keyed candidate actions used to warm-start
//! the MPC and to stand in when its solve fails or times out. Every output
//! still passes the safety filter before actuation.

use super::mode::Mode;
use crate::chem::min_circulation;
use crate::config::Config;
use crate::constants::{ATM_PA, MOLAR_VOLUME_STP, M_O2};
use crate::gas::suit_pressure;
use crate::physio::saturation_pressure;
use crate::plant::{ControlInput, PlantState};

/// Candidate action for the current mode.
pub fn fallback_policy(
    x_hat: &PlantState,
    mode: Mode,
    prev_applied: &ControlInput,
    p_ambient: f64,
    cfg: &Config,
) -> ControlInput {
    match mode {
        Mode::Normal => *prev_applied,
        Mode::Conservation => conservation_action(x_hat, cfg),
        Mode::Emergency | Mode::CascadeFailure => emergency_action(x_hat, p_ambient, cfg),
    }
    .clamp_to(&cfg.mpc.u_min, &cfg.mpc.u_max)
}

fn conservation_action(x_hat: &PlantState, cfg: &Config) -> ControlInput {
    // Injection matches the estimated metabolic demand; fan at the minimum
    // circulation that holds the nominal CO2 ceiling at the estimated
    // production rate.
    let inject = x_hat.vo2_hat * M_O2 / MOLAR_VOLUME_STP / 60.0;
    let production_mol_min = cfg.metabolic.rer * x_hat.vo2_hat / MOLAR_VOLUME_STP;
    let q_min = min_circulation(
        production_mol_min,
        crate::constants::kelvin(x_hat.t_bz),
        0.0025,
        0.0,
    )
    .unwrap_or(cfg.plant.fan_full_scale_l_min);
    let fan = (q_min / cfg.plant.fan_full_scale_l_min).clamp(cfg.plant.fan_floor, 1.0);
    ControlInput {
        m_dot_o2: inject,
        fan,
        bypass: bypass_for_bed(x_hat.t_bed),
    }
}

fn emergency_action(x_hat: &PlantState, p_ambient: f64, cfg: &Config) -> ControlInput {
    // Injection drives the O2 fraction toward the level where wet-basis
    // P_iO2 sits at the hard floor, with a first-order approach.
    let p_s = suit_pressure(x_hat.v_cl, p_ambient, &cfg.vent);
    let n_tot = x_hat.n_total().max(1e-9);
    let x_o2 = x_hat.n_o2.max(0.0) / n_tot;
    let p_h2o = (x_hat.n_h2o.max(0.0) / n_tot * p_s).min(saturation_pressure(x_hat.t_bz));
    let dry_term = ((p_s - p_h2o) / ATM_PA).max(1e-6);
    let x_target = (cfg.cbf.p_io2_min_atm / dry_term).min(0.95);
    let consumption = x_hat.vo2_hat / MOLAR_VOLUME_STP / 60.0;
    let tau = 60.0;
    let n_dot_extra = n_tot * (x_target - x_o2) / ((1.0 - x_o2).max(0.05) * tau);
    let inject = ((consumption + n_dot_extra) * M_O2).max(0.0);

    // Minimum fan for survival, raised when the CO2 floor (the second
    // triage priority) comes under pressure.
    let x_co2 = x_hat.n_co2 / n_tot;
    let cap = cfg.cbf.x_co2_cap_cascade;
    let fan = if x_co2 > 0.5 * cap {
        ((x_co2 - 0.5 * cap) / (0.3 * cap)).clamp(0.0, 1.0).max(cfg.plant.fan_floor)
    } else {
        cfg.plant.fan_floor
    };
    ControlInput {
        m_dot_o2: inject,
        fan,
        bypass: bypass_for_bed(x_hat.t_bed),
    }
}

fn bypass_for_bed(t_bed_c: f64) -> f64 {
    ((t_bed_c - 75.0) / 10.0).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physio::pio2_wet;
    use crate::plant::initial_state;

    #[test]
    fn normal_holds_previous_command() {
        let cfg = Config::default();
        let x = initial_state(&cfg);
        let prev = ControlInput {
            m_dot_o2: 0.07,
            fan: 0.6,
            bypass: 0.1,
        };
        let u = fallback_policy(&x, Mode::Normal, &prev, 101_325.0, &cfg);
        assert_eq!(u, prev);
    }

    #[test]
    fn emergency_injection_targets_hard_floor() {
        let cfg = Config::default();
        let mut x = initial_state(&cfg);
        // Deplete O2 so wet P_iO2 sits below the floor.
        x.n_o2 *= 0.7;
        x.renormalize_x_o2();
        let u = fallback_policy(&x, Mode::Emergency, &ControlInput::ZERO, 101_325.0, &cfg);
        assert!(u.m_dot_o2 > 0.0);
        // And the implied target composition restores P_iO2 = 0.16 atm.
        let p_s = suit_pressure(x.v_cl, 101_325.0, &cfg.vent);
        let n_tot = x.n_total();
        let rh = (x.n_h2o / n_tot * p_s / saturation_pressure(x.t_bz) * 100.0).clamp(0.0, 100.0);
        let x_target = {
            let p_h2o = (x.n_h2o / n_tot * p_s).min(saturation_pressure(x.t_bz));
            cfg.cbf.p_io2_min_atm / ((p_s - p_h2o) / ATM_PA)
        };
        let achieved = pio2_wet(p_s, x.t_bz, rh, x_target);
        assert!((achieved - cfg.cbf.p_io2_min_atm).abs() < 2e-3, "{achieved}");
    }

    #[test]
    fn emergency_runs_minimum_fan_when_co2_is_clear() {
        let cfg = Config::default();
        let x = initial_state(&cfg);
        let u = fallback_policy(&x, Mode::Emergency, &ControlInput::ZERO, 101_325.0, &cfg);
        assert_eq!(u.fan, cfg.plant.fan_floor);
        assert_eq!(u.bypass, 0.0);
    }

    #[test]
    fn cascade_prioritizes_co2_after_oxygen() {
        let cfg = Config::default();
        let mut x = initial_state(&cfg);
        let n = x.n_total();
        x.n_co2 = 0.03 * n;
        let u = fallback_policy(&x, Mode::CascadeFailure, &ControlInput::ZERO, 101_325.0, &cfg);
        assert_eq!(u.fan, 1.0);
    }

    #[test]
    fn hot_bed_opens_bypass() {
        let cfg = Config::default();
        let mut x = initial_state(&cfg);
        x.t_bed = 85.0;
        let u = fallback_policy(&x, Mode::Emergency, &ControlInput::ZERO, 101_325.0, &cfg);
        assert_eq!(u.bypass, 1.0);
    }
}
