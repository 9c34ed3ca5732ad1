//! The coupled plant right-hand side: gas-phase mass balances, scrubber and
//! desiccant dynamics, suit thermal network, and physiology, assembled from
//! the domain modules.

use super::state::{ControlInput, Disturbance, PlantState, STATE_NAMES};
use crate::chem::{
    effectiveness, reaction_enthalpy, swelling_ratio, viscous_resistance_ratio, void_fraction,
};
use crate::config::Config;
use crate::constants::{kelvin, CP_AIR, MOLAR_VOLUME_STP, M_CAOH2, M_O2, R_GAS};
use crate::gas::{counterlung_rhs, phase_averaged_vent, suit_pressure};
use crate::physio::{
    co2_production, core_temp_rhs, hr_rhs, pio2_wet, saturation_pressure, uptd_rate, vo2_of_work,
    work_from_hr,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlantError {
    #[error("non-finite derivative in state component {component}")]
    NonFinite { component: &'static str },
    #[error("negative species {component} = {value} beyond tolerance after {halvings} step halvings")]
    NegativeSpecies {
        component: &'static str,
        value: f64,
        halvings: u32,
    },
}

/// Instantaneous flow and heat diagnostics produced alongside each
/// derivative evaluation; the integrator combines these with the RK4
/// weights so the conservation audits use exactly the quadrature of the
/// state updates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Flows {
    /// O2 injection [mol/s].
    pub n_dot_inject: f64,
    /// Metabolic O2 uptake [mol/s].
    pub n_dot_consumed: f64,
    /// Total outward molar flow, exhaust valve plus leak [mol/s].
    pub n_dot_vent: f64,
    /// Vent O2 / N2 shares [mol/s].
    pub vent_o2: f64,
    pub vent_n2: f64,
    /// CO2 production and scrubbing [mol/s].
    pub co2_produced: f64,
    pub r_scrub: f64,
    /// Desiccant uptake [mol/s] and exhaled water [mol/s].
    pub n_dot_ads: f64,
    pub n_dot_exhaled: f64,
    /// Heat rates [W].
    pub q_scrub: f64,
    pub q_ads: f64,
    /// Loop circulation [L/min] after derating.
    pub q_circ_l_min: f64,
    /// Suit pressure [Pa] and wet-basis inspired O2 [atm].
    pub p_s: f64,
    pub p_io2: f64,
    /// Relative humidity at the breathing zone [%].
    pub rh_pct: f64,
}

/// Plant model: the configuration plus the controller-side effectiveness
/// correction (1.0 for the truth plant; the scrubber-health estimate for
/// the prediction model).
#[derive(Clone)]
pub struct PlantModel<'a> {
    pub cfg: &'a Config,
    pub eta_correction: f64,
}

impl<'a> PlantModel<'a> {
    pub fn truth(cfg: &'a Config) -> Self {
        PlantModel {
            cfg,
            eta_correction: 1.0,
        }
    }

    pub fn with_eta_correction(cfg: &'a Config, eta_correction: f64) -> Self {
        PlantModel {
            cfg,
            eta_correction,
        }
    }

    /// Circulation flow [L/min] for a fan fraction at conversion `xi`:
    /// full-scale flow derated by the Ergun resistance growth.
    pub fn fan_map(&self, fan: f64, xi: f64) -> f64 {
        let p = &self.cfg.plant;
        let s = &self.cfg.scrubber;
        let eps = void_fraction(xi.clamp(0.0, 1.0), s.eps0, swelling_ratio(s.chi_w));
        let ratio = viscous_resistance_ratio(eps.max(0.02), s.eps0);
        let fan = fan.clamp(0.0, 1.0);
        fan * p.fan_full_scale_l_min / (1.0 + p.fan_derate_coeff * (ratio - 1.0))
    }

    /// Loop pressure drop [Pa] at the current circulation flow, used for
    /// the respiratory-effort coupling.
    fn loop_dp_pa(&self, q_circ_l_min: f64, xi: f64, t_bz_c: f64, p_s: f64) -> f64 {
        let s = &self.cfg.scrubber;
        let eps = void_fraction(xi.clamp(0.0, 1.0), s.eps0, swelling_ratio(s.chi_w)).max(0.02);
        let area = s.v_bed / s.l_bed;
        let v_s = q_circ_l_min / 60.0 / 1000.0 / area;
        let rho = p_s * 0.0288 / (R_GAS * kelvin(t_bz_c));
        let mu = 1.85e-5;
        // Two beds of comparable geometry plus ducting.
        crate::chem::ergun_dp_per_length(mu, eps, s.d_p, v_s, rho)
            .map(|dp| 2.2 * dp * s.l_bed)
            .unwrap_or(0.0)
    }

    /// Tidal oscillation amplitude of the counter-lung [L] at work rate `w`.
    pub fn tidal_amplitude_l(&self, w: f64) -> f64 {
        let p = &self.cfg.plant;
        let tidal =
            p.tidal_rest_l + (p.tidal_max_l - p.tidal_rest_l) * (w / p.tidal_peak_work_w).clamp(0.0, 1.0);
        0.5 * tidal
    }

    /// Evaluate the plant derivative and flow diagnostics.
    pub fn rhs(
        &self,
        x: &PlantState,
        u: &ControlInput,
        d: &Disturbance,
    ) -> Result<(PlantState, Flows), PlantError> {
        let cfg = self.cfg;
        let n_tot = x.n_total().max(1e-9);
        let x_o2 = x.n_o2.max(0.0) / n_tot;
        let x_co2 = x.n_co2.max(0.0) / n_tot;
        let x_h2o = x.n_h2o.max(0.0) / n_tot;
        let x_n2 = x.n_n2.max(0.0) / n_tot;

        let t_bz_k = kelvin(x.t_bz);
        let p_s = suit_pressure(x.v_cl, d.p_a, &cfg.vent);
        let mean_m = (x_o2 * 31.998 + x_co2 * 44.01 + x_h2o * 18.015 + x_n2 * 28.014) / 1000.0;
        let rho_s = p_s * mean_m / (R_GAS * t_bz_k);

        // Circulation and respiratory effort.
        let q_circ_l_min = self.fan_map(u.fan, x.xi);
        let q_m3s = q_circ_l_min / 60.0 / 1000.0;
        let dp_loop = self.loop_dp_pa(q_circ_l_min, x.xi, x.t_bz, p_s);

        // Metabolism, with the work of breathing against loop resistance
        // added to the external work rate.
        let m = &cfg.metabolic;
        let vo2_nominal = vo2_of_work(d.w, m.vo2_rest, m.gamma, m.beta);
        let w_breath =
            cfg.plant.breath_work_w_per_kpa_vo2 * (dp_loop / 1000.0) * (vo2_nominal / 2.0);
        let w_eff = d.w + w_breath;
        let vo2_true = vo2_of_work(w_eff, m.vo2_rest, m.gamma, m.beta);
        let n_dot_consumed = vo2_true / MOLAR_VOLUME_STP / 60.0;
        let co2_produced = co2_production(vo2_true, m.rer) / 60.0;

        // Scrubbing: single-pass removal from the through-bed flow, fed by
        // the loop concentration plus the captured exhale plume.
        let s = &cfg.scrubber;
        let xi_c = x.xi.clamp(0.0, 1.0);
        let eta = effectiveness(xi_c, s.effectiveness_exponent).unwrap_or(0.0)
            * self.eta_correction.clamp(0.0, 1.0);
        let p_co2 = x_co2 * p_s;
        let through = (1.0 - u.bypass.clamp(0.0, 1.0)) * q_m3s;
        let r_scrub = if through > 1e-9 && x.m_caoh2 > 0.0 {
            let ntu = s.k_ov_as_vbed * eta * R_GAS * t_bz_k / through;
            let feed = through * (p_co2 - s.p_co2_eq).max(0.0) / (R_GAS * t_bz_k)
                + (1.0 - u.bypass.clamp(0.0, 1.0)) * cfg.plant.exhale_capture_frac * co2_produced;
            feed * (1.0 - (-ntu).exp())
        } else {
            0.0
        };

        // Desiccant: LDF uptake toward the GAB equilibrium at the current
        // activity, capped by the vapor the through-flow can deliver.
        let de = &cfg.desiccant;
        let p_h2o = x_h2o * p_s;
        let p_sat = saturation_pressure(x.t_bz);
        let rh_pct = (p_h2o / p_sat * 100.0).clamp(0.0, 100.0);
        let a_w = (rh_pct / 100.0).min(0.999);
        let q_m_t = crate::chem::monolayer_capacity_at(de.q_m, de.e_qm_j_per_mol, t_bz_k);
        let q_e = crate::chem::gab_loading(a_w, q_m_t, de.c_g, de.k_g).unwrap_or(de.q_m);
        let q_bar = (x.m_water / de.dry_mass_kg).max(0.0);
        let ldf_kg_s = de.dry_mass_kg * crate::chem::ldf_rate(q_bar, q_e, de.k_ldf);
        let vapor_cap_mol_s = 0.865 * q_m3s * p_h2o / (R_GAS * t_bz_k);
        let mut dm_water = ldf_kg_s.min(vapor_cap_mol_s * 18.015e-3);
        if x.m_water >= de.m_water_max_kg && dm_water > 0.0 {
            dm_water = 0.0;
        }
        if x.m_water <= 0.0 && dm_water < 0.0 {
            dm_water = 0.0;
        }
        let n_dot_ads = dm_water / 18.015e-3;

        // Exhaled moisture.
        let exhaled_g_min =
            cfg.plant.exhaled_water_base_g_min + cfg.plant.exhaled_water_per_vo2 * vo2_true;
        let n_dot_exhaled = exhaled_g_min / 60.0 / 18.015;

        // Venting: exhaust valve rectified over the tidal + movement
        // oscillation, plus any scripted leak.
        let osc = (self.tidal_amplitude_l(d.w).powi(2) + d.movement_osc_l.powi(2)).sqrt();
        let valve_vent = phase_averaged_vent(x.v_cl, osc, d.p_a, rho_s, mean_m, &cfg.vent);
        let leak = if d.leak_area_m2 > 0.0 {
            cfg.vent.c_d * d.leak_area_m2 / mean_m * (2.0 * rho_s * (p_s - d.p_a).max(0.0)).sqrt()
        } else {
            0.0
        };
        let n_dot_vent = valve_vent + leak;

        // O2 injection, bounded by the remaining tank. The delivery rolls
        // off smoothly over the last ~0.2 g so the depletion boundary never
        // drives a species sign change inside an integrator stage.
        let tank_gate = (x.m_tank / 2e-4).clamp(0.0, 1.0);
        let m_dot_inject = u.m_dot_o2.max(0.0) * tank_gate;
        let n_dot_inject = m_dot_inject / M_O2;

        // Heat rates.
        let dh = reaction_enthalpy(&cfg.thermo).abs();
        let q_scrub = dh * 1000.0 * r_scrub;
        let q_ads = de.dh_ads_kj_per_kg * 1000.0 * dm_water;

        // Species balances.
        let dn_o2 = n_dot_inject - n_dot_consumed - x_o2 * n_dot_vent;
        let dn_co2 = co2_produced - r_scrub - x_co2 * n_dot_vent;
        let dn_h2o = n_dot_exhaled + r_scrub - n_dot_ads - x_h2o * n_dot_vent;
        let dn_n2 = -x_n2 * n_dot_vent;
        let dn_tot = dn_o2 + dn_co2 + dn_h2o + dn_n2;
        let dx_o2 = (dn_o2 - x_o2 * dn_tot) / n_tot;

        // Thermal network.
        let m_dot_bed = through * rho_s;
        let d_t_bed = crate::chem::bed_temp_rhs(
            x.t_bed,
            q_scrub,
            m_dot_bed,
            x.t_bz,
            x.t_torso,
            s.rho_cp_bed,
            s.v_bed,
            s.ua_wall,
        );
        let h_bz = cfg.plant.h_bz_base_w_per_k + cfg.plant.h_bz_slope_w_per_k * u.fan.clamp(0.0, 1.0);
        let fan_heat = cfg.plant.fan_heat_w_max * u.fan.clamp(0.0, 1.0).powi(3);
        let d_t_bz = (m_dot_bed * CP_AIR * (x.t_bed - x.t_bz) + q_ads + fan_heat
            - h_bz * (x.t_bz - x.t_torso))
            / cfg.plant.c_bz_j_per_k;
        let q_skin_met = cfg.plant.q_skin_base_w + cfg.plant.q_skin_per_watt * d.w;
        let d_t_torso = (q_skin_met
            + cfg.plant.u_shell_a_w_per_k * (d.t_ext - x.t_torso)
            + d.q_rad * 1000.0 * cfg.plant.tau_shell_a_m2
            + h_bz * (x.t_bz - x.t_torso)
            - cfg.plant.u_residual_w_per_k * (x.t_torso - cfg.plant.t_residual_c))
            / cfg.plant.c_torso_j_per_k;

        // Counter-lung: molar balance, thermal expansion of the loop gas,
        // and (tick-averaged) tidal flow.
        let v_gas_l = n_tot * R_GAS * 1000.0 * t_bz_k / p_s / 1000.0;
        let d_v_cl = counterlung_rhs(
            t_bz_k,
            p_s,
            n_dot_inject,
            n_dot_consumed,
            n_dot_vent,
            v_gas_l,
            d_t_bz,
            0.0,
        );

        // Physiology.
        let p_io2 = pio2_wet(p_s, x.t_bz, rh_pct, x_o2);
        let d_hr = hr_rhs(x.hr, w_eff, rh_pct, x.t_core, x_o2, m);
        let d_t_core = core_temp_rhs(x.t_core, x.w_hat, x.t_torso, m);
        let w_target = work_from_hr(x.hr, rh_pct, x.t_core, x_o2, m);
        let d_w_hat = (w_target - x.w_hat) / m.tau_w_hat;
        let d_vo2_hat =
            (vo2_of_work(x.w_hat, m.vo2_rest, m.gamma, m.beta) - x.vo2_hat) / m.tau_vo2_hat;
        let d_uptd = uptd_rate(p_io2);

        // Sorbent depletion via 1:1 stoichiometry.
        let d_m_caoh2 = -r_scrub * M_CAOH2 / 1000.0;
        let caoh2_0 = s.caoh2_initial_kg();
        let d_xi = r_scrub * M_CAOH2 / 1000.0 / caoh2_0;

        let deriv = PlantState {
            n_o2: dn_o2,
            n_co2: dn_co2,
            n_h2o: dn_h2o,
            n_n2: dn_n2,
            x_o2: dx_o2,
            v_cl: d_v_cl,
            m_tank: -m_dot_inject / 1000.0,
            m_caoh2: d_m_caoh2,
            xi: d_xi,
            m_water: dm_water,
            t_bed: d_t_bed,
            t_bz: d_t_bz,
            t_torso: d_t_torso,
            hr: d_hr,
            t_core: d_t_core,
            vo2_hat: d_vo2_hat,
            w_hat: d_w_hat,
            uptd: d_uptd,
        };

        let dv = deriv.to_vector();
        for (i, v) in dv.iter().enumerate() {
            if !v.is_finite() {
                return Err(PlantError::NonFinite {
                    component: STATE_NAMES[i],
                });
            }
        }

        let flows = Flows {
            n_dot_inject,
            n_dot_consumed,
            n_dot_vent,
            vent_o2: x_o2 * n_dot_vent,
            vent_n2: x_n2 * n_dot_vent,
            co2_produced,
            r_scrub,
            n_dot_ads,
            n_dot_exhaled,
            q_scrub,
            q_ads,
            q_circ_l_min,
            p_s,
            p_io2,
            rh_pct,
        };
        Ok((deriv, flows))
    }

    /// Algebraic observables for an arbitrary state (no derivative).
    pub fn observables(&self, x: &PlantState, u: &ControlInput, d: &Disturbance) -> Observables {
        let n_tot = x.n_total().max(1e-9);
        let p_s = suit_pressure(x.v_cl, d.p_a, &self.cfg.vent);
        let p_h2o = x.n_h2o.max(0.0) / n_tot * p_s;
        let rh_pct = (p_h2o / saturation_pressure(x.t_bz) * 100.0).clamp(0.0, 100.0);
        let x_o2 = x.n_o2.max(0.0) / n_tot;
        Observables {
            p_s,
            rh_pct,
            x_co2: x.n_co2.max(0.0) / n_tot,
            x_o2,
            p_io2_atm: pio2_wet(p_s, x.t_bz, rh_pct, x_o2),
            q_circ_l_min: self.fan_map(u.fan, x.xi),
        }
    }
}

/// Derived algebraic quantities used by sensing, control, and logging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub p_s: f64,
    pub rh_pct: f64,
    pub x_co2: f64,
    pub x_o2: f64,
    pub p_io2_atm: f64,
    pub q_circ_l_min: f64,
}

/// Initial plant state from the configured loop fill.
pub fn initial_state(cfg: &Config) -> PlantState {
    let p = &cfg.plant;
    let inv = crate::gas::GasInventory::air_fill(p.n_total_init, p.x_o2_init, p.x_co2_init, p.x_h2o_init);
    PlantState {
        n_o2: inv.n_o2,
        n_co2: inv.n_co2,
        n_h2o: inv.n_h2o,
        n_n2: inv.n_n2,
        x_o2: inv.x_o2(),
        v_cl: p.v_cl_init_l,
        m_tank: cfg.tank.mass_kg,
        m_caoh2: cfg.scrubber.caoh2_initial_kg(),
        xi: 0.0,
        m_water: 0.0,
        t_bed: p.t_bed_init_c,
        t_bz: p.t_bz_init_c,
        t_torso: p.t_torso_init_c,
        hr: p.hr_init_bpm,
        t_core: p.t_core_init_c,
        vo2_hat: cfg.metabolic.vo2_rest,
        w_hat: 0.0,
        uptd: 0.0,
    }
}
