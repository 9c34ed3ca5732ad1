//! Single JSON configuration document. Sections mirror the parameter types
//! of the physics and control modules; the `provenance` map records, for
//! every default, whether it is a quoted source value (`paper: ...`) or an
//! implementer calibration choice (`calibration`).

use crate::chem::{DesiccantParams, ScrubberParams, ThermoTable};
use crate::gas::{O2Tank, ValveModel, VentParams};
use crate::physio::MetabolicParams;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse config {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Plant-level parameters: initial loop fill, fan map, suit thermal
/// network, breathing and moisture models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantParams {
    /// Initial total loop inventory [mol].
    pub n_total_init: f64,
    pub x_o2_init: f64,
    pub x_co2_init: f64,
    pub x_h2o_init: f64,
    pub t_bz_init_c: f64,
    pub t_torso_init_c: f64,
    pub t_bed_init_c: f64,
    pub t_core_init_c: f64,
    pub hr_init_bpm: f64,
    pub v_cl_init_l: f64,
    /// Fan full-scale circulation [L/min].
    pub fan_full_scale_l_min: f64,
    /// Fan floor as a fraction of full scale.
    pub fan_floor: f64,
    /// Flow derating slope against the Ergun resistance ratio.
    pub fan_derate_coeff: f64,
    /// Fan motor heat dumped into the loop at full speed [W] (cubic law).
    pub fan_heat_w_max: f64,
    /// Fraction of metabolic CO2 captured by the outtake duct before
    /// mixing into the loop volume.
    pub exhale_capture_frac: f64,
    /// Breathing-zone thermal capacitance [J/K].
    pub c_bz_j_per_k: f64,
    /// Torso microclimate thermal capacitance [J/K].
    pub c_torso_j_per_k: f64,
    /// Gas-to-torso convective coupling at zero flow [W/K].
    pub h_bz_base_w_per_k: f64,
    /// Convective coupling slope with fan fraction [W/K].
    pub h_bz_slope_w_per_k: f64,
    /// Suit shell conductance U_shell·A_shell [W/K].
    pub u_shell_a_w_per_k: f64,
    /// Residual conductance to surfaces at working-ambient temperature
    /// (boots, lower extremities, fresh-air boundary layer) [W/K].
    pub u_residual_w_per_k: f64,
    /// Reference temperature of the residual path [°C].
    pub t_residual_c: f64,
    /// Radiant transmission τ_shell·A_shell [m²].
    pub tau_shell_a_m2: f64,
    /// Metabolic heat reaching the skin: base [W] and slope [W/W].
    pub q_skin_base_w: f64,
    pub q_skin_per_watt: f64,
    /// Respiratory work against loop resistance [W per kPa per (L/min O2)].
    pub breath_work_w_per_kpa_vo2: f64,
    /// Tidal volume at rest and at peak work [L].
    pub tidal_rest_l: f64,
    pub tidal_max_l: f64,
    /// Work rate mapping to peak tidal volume [W].
    pub tidal_peak_work_w: f64,
    /// Movement-induced counter-lung oscillation per unit activity [L].
    pub movement_osc_l_per_activity: f64,
    /// Exhaled water: base [g/min] and slope with VO2 [g/min per L/min].
    pub exhaled_water_base_g_min: f64,
    pub exhaled_water_per_vo2: f64,
    /// Ambient pressure default [Pa].
    pub p_ambient_pa: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        PlantParams {
            n_total_init: 4.0,
            x_o2_init: 0.21,
            x_co2_init: 400e-6,
            x_h2o_init: 0.022,
            t_bz_init_c: 35.0,
            t_torso_init_c: 33.0,
            t_bed_init_c: 35.0,
            t_core_init_c: 37.0,
            hr_init_bpm: 75.0,
            v_cl_init_l: 4.0,
            fan_full_scale_l_min: 400.0,
            fan_floor: 0.05,
            fan_derate_coeff: 0.12,
            fan_heat_w_max: 15.0,
            exhale_capture_frac: 0.68,
            c_bz_j_per_k: 2.0e3,
            c_torso_j_per_k: 3.0e4,
            h_bz_base_w_per_k: 15.0,
            h_bz_slope_w_per_k: 45.0,
            u_shell_a_w_per_k: 0.5,
            u_residual_w_per_k: 34.0,
            t_residual_c: 25.0,
            tau_shell_a_m2: 0.002,
            q_skin_base_w: 70.0,
            q_skin_per_watt: 0.25,
            breath_work_w_per_kpa_vo2: 35.0,
            tidal_rest_l: 1.0,
            tidal_max_l: 2.5,
            tidal_peak_work_w: 500.0,
            movement_osc_l_per_activity: 0.8,
            exhaled_water_base_g_min: 0.3,
            exhaled_water_per_vo2: 0.8,
            p_ambient_pa: 101_325.0,
        }
    }
}

/// Per-channel sensor noise (1σ) and quantization steps from the sensor
/// tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensorParams {
    pub noise_enabled: bool,
    pub sigma_x_co2: f64,
    pub sigma_x_o2: f64,
    pub sigma_rh_pct: f64,
    pub sigma_t_bz_c: f64,
    pub sigma_t_torso_c: f64,
    pub sigma_t_bed_c: f64,
    pub sigma_dp_pa: f64,
    pub sigma_q_circ_l_min: f64,
    pub sigma_v_cl_l: f64,
    pub sigma_hr_bpm: f64,
    pub sigma_hrv_ms: f64,
    pub sigma_accel_g: f64,
    pub sigma_q_rad_kw_m2: f64,
    pub sigma_t_ext_c: f64,
    pub sigma_toxic_ppm: f64,
    pub sigma_p_a_pa: f64,
}

impl Default for SensorParams {
    fn default() -> Self {
        SensorParams {
            noise_enabled: true,
            sigma_x_co2: 1.0e-4,
            sigma_x_o2: 1.0e-3,
            sigma_rh_pct: 1.5,
            sigma_t_bz_c: 0.5,
            sigma_t_torso_c: 0.5,
            sigma_t_bed_c: 1.0,
            sigma_dp_pa: 10.0,
            sigma_q_circ_l_min: 8.0,
            sigma_v_cl_l: 0.05,
            sigma_hr_bpm: 1.0,
            sigma_hrv_ms: 1.0,
            sigma_accel_g: 0.05,
            sigma_q_rad_kw_m2: 1.0,
            sigma_t_ext_c: 2.0,
            sigma_toxic_ppm: 5.0,
            sigma_p_a_pa: 50.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EkfParams {
    /// Process noise diagonal, one entry per state.
    pub q_diag: [f64; 18],
    /// Initial covariance diagonal.
    pub p0_diag: [f64; 18],
    /// Per-state finite-difference step scales.
    pub fd_scale: [f64; 18],
    /// Relative finite-difference step.
    pub fd_rel_step: f64,
    /// Innovation gate [σ].
    pub innovation_gate_sigma: f64,
    /// trace(P) threshold above which residual-driven adaptation suspends.
    pub trace_suspend_threshold: f64,
    /// Measurement noise for the x_O2 consistency pseudo-measurement.
    pub pseudo_meas_r: f64,
}

impl Default for EkfParams {
    fn default() -> Self {
        let scale = [
            1.0, 0.01, 0.1, 1.0, 0.01, 1.0, 0.1, 0.1, 0.1, 0.01, 1.0, 1.0, 1.0, 10.0, 0.5, 0.5,
            50.0, 1.0,
        ];
        // Process noise per 1 s tick: dominated by the unknown work rate
        // feeding the gas and physiological balances, and by the
        // movement/vent volume disturbance on the counter-lung.
        let sq = |v: f64| v * v;
        let q = [
            sq(2e-4),  // n_O2: consumption model error
            sq(2e-4),  // n_CO2
            sq(3e-4),  // n_H2O
            sq(1e-5),  // n_N2: vent share only
            sq(1e-5),  // x_O2 (pseudo-measurement re-ties it)
            sq(0.05),  // V_CL: movement and vent rectification
            sq(1e-6),  // tank: commanded injection is known
            sq(2e-6),  // Ca(OH)2
            sq(2e-6),  // ξ
            sq(2e-5),  // desiccant water
            sq(0.05),  // T_bed
            sq(0.05),  // T_bz
            sq(0.05),  // T_torso
            sq(6.0),   // HR: slews several bpm/s under unmodeled work steps
            sq(0.01),  // T_core
            sq(0.02),  // VO2_hat
            sq(5.0),   // W_hat random walk
            sq(1e-6),  // UPTD
        ];
        let mut p0 = [0.0; 18];
        for i in 0..18 {
            p0[i] = sq(0.03 * scale[i]);
        }
        // Latent physiological states start wide.
        p0[16] = 400.0;
        p0[14] = 0.25;
        p0[15] = 0.25;
        EkfParams {
            q_diag: q,
            p0_diag: p0,
            fd_scale: scale,
            fd_rel_step: 1e-6,
            innovation_gate_sigma: 6.0,
            trace_suspend_threshold: 1.0e4,
            pseudo_meas_r: 1e-10,
        }
    }
}

/// One-sided soft limit with the hinge normalization (max − nominal) or
/// (nominal − min).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SoftBand {
    pub min: Option<f64>,
    pub nominal: f64,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MpcParams {
    /// Prediction horizon [steps].
    pub horizon: usize,
    /// Move-block size [steps per block].
    pub block: usize,
    /// Control interval [s].
    pub dt: f64,
    pub w_safety: f64,
    pub w_comfort: f64,
    pub w_resource: f64,
    pub w_smooth: f64,
    pub w_decouple: f64,
    /// Scarcity multiplier baseline and exponent.
    pub lambda0: f64,
    pub alpha: f64,
    pub lambda_max: f64,
    /// Soft bands for safety states.
    pub band_p_io2: SoftBand,
    pub band_x_o2: SoftBand,
    pub band_x_co2: SoftBand,
    pub band_rh: SoftBand,
    pub band_t_bed: SoftBand,
    pub band_t_core: SoftBand,
    /// Comfort setpoints.
    pub rh_setpoint_pct: f64,
    pub t_comfort_c: f64,
    /// Decoupling threshold on RH [%].
    pub rh_thresh_pct: f64,
    /// Actuator bounds (inject g/s, fan fraction, bypass fraction).
    pub u_min: [f64; 3],
    pub u_max: [f64; 3],
    /// QP iteration cap and wall-clock deadline [ms].
    pub qp_max_iters: usize,
    pub deadline_ms: f64,
    /// Smoothed-vent pressure scale used for cost gradients below the
    /// cracking threshold [Pa].
    pub vent_softness_pa: f64,
    /// Hard UPTD budget.
    pub uptd_max: f64,
}

impl Default for MpcParams {
    fn default() -> Self {
        MpcParams {
            horizon: 16,
            block: 4,
            dt: 1.0,
            w_safety: 40.0,
            w_comfort: 0.02,
            w_resource: 1.0,
            w_smooth: 2.0,
            w_decouple: 1.0,
            lambda0: 60.0,
            alpha: 2.0,
            lambda_max: 1.0e5,
            band_p_io2: SoftBand {
                min: Some(0.19),
                nominal: 0.200,
                max: Some(0.50),
            },
            band_x_o2: SoftBand {
                min: None,
                nominal: 0.21,
                max: Some(0.228),
            },
            band_x_co2: SoftBand {
                min: None,
                nominal: 0.0018,
                max: Some(0.0028),
            },
            band_rh: SoftBand {
                min: None,
                nominal: 40.0,
                max: Some(60.0),
            },
            band_t_bed: SoftBand {
                min: None,
                nominal: 45.0,
                max: Some(75.0),
            },
            band_t_core: SoftBand {
                min: None,
                nominal: 37.2,
                max: Some(38.8),
            },
            rh_setpoint_pct: 40.0,
            t_comfort_c: 28.0,
            rh_thresh_pct: 60.0,
            u_min: [0.0, 0.05, 0.0],
            u_max: [1.0, 1.0, 1.0],
            qp_max_iters: 1500,
            deadline_ms: 100.0,
            vent_softness_pa: 150.0,
            uptd_max: 300.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CbfParams {
    /// Class-K coefficients κ_j ∈ (0, 1] for the five barriers.
    pub kappa: [f64; 5],
    /// Hard hypoxia floor, wet basis [atm].
    pub p_io2_min_atm: f64,
    /// CO2 fraction cap by mode (normal, cascade).
    pub x_co2_cap_normal: f64,
    pub x_co2_cap_cascade: f64,
    /// UPTD budget (shared with the MPC dose constraint).
    pub uptd_max: f64,
    /// QP wall-clock budget [ms] and solve tolerance.
    pub deadline_ms: f64,
    pub qp_tol: f64,
    /// Conservatism margins absorbing estimate-vs-truth error on the
    /// filtered floors: the barriers enforce P_iO2 ≥ 0.16 + margin and
    /// V_CL ≥ V_CL_min + margin on the estimate.
    pub margin_p_io2_atm: f64,
    pub margin_v_cl_l: f64,
}

impl Default for CbfParams {
    fn default() -> Self {
        CbfParams {
            kappa: [0.2; 5],
            p_io2_min_atm: 0.16,
            x_co2_cap_normal: 0.05,
            x_co2_cap_cascade: 0.03,
            uptd_max: 300.0,
            deadline_ms: 1.0,
            qp_tol: 1e-10,
            margin_p_io2_atm: 0.006,
            margin_v_cl_l: 0.40,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PidParams {
    /// P_iO2 loop → O2 injection [g/s per atm].
    pub o2_kp: f64,
    pub o2_ki: f64,
    pub o2_kd: f64,
    pub o2_setpoint_atm: f64,
    /// x_CO2 loop → fan fraction [1 per CO2 fraction].
    pub co2_kp: f64,
    pub co2_ki: f64,
    pub co2_kd: f64,
    pub co2_setpoint: f64,
    /// T_bed loop → bypass fraction [1/°C].
    pub bed_kp: f64,
    pub bed_ki: f64,
    pub bed_kd: f64,
    pub bed_setpoint_c: f64,
    /// Base fan command the CO2 loop trims around.
    pub fan_bias: f64,
}

impl Default for PidParams {
    fn default() -> Self {
        // Ziegler-Nichols-style tuning on the steady moderate scenario at
        // fixed 250 W, then frozen.
        PidParams {
            o2_kp: 60.0,
            o2_ki: 1.2,
            o2_kd: 0.0,
            o2_setpoint_atm: 0.208,
            co2_kp: 600.0,
            co2_ki: 12.0,
            co2_kd: 0.0,
            co2_setpoint: 0.002,
            bed_kp: 0.08,
            bed_ki: 0.004,
            bed_kd: 0.0,
            bed_setpoint_c: 70.0,
            fan_bias: 0.45,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeParams {
    /// Conservation onset when any consumable drops below this fraction.
    pub conservation_frac: f64,
    /// Emergency onset fraction.
    pub emergency_frac: f64,
    /// Recovery hysteresis [fraction points].
    pub hysteresis_frac: f64,
    /// Danger-zone edges for emergency entry.
    pub danger_hr_bpm: f64,
    pub danger_t_core_c: f64,
    pub danger_x_o2: f64,
    pub danger_x_co2: f64,
    pub danger_p_io2_atm: f64,
    pub danger_t_bed_c: f64,
}

impl Default for ModeParams {
    fn default() -> Self {
        ModeParams {
            conservation_frac: 0.25,
            emergency_frac: 0.10,
            hysteresis_frac: 0.05,
            danger_hr_bpm: 210.0,
            danger_t_core_c: 39.5,
            danger_x_o2: 0.233,
            danger_x_co2: 0.025,
            danger_p_io2_atm: 0.175,
            danger_t_bed_c: 85.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThreatParams {
    pub q_rad_max_kw_m2: f64,
    pub t_ext_max_c: f64,
    pub dtorso_rate_max_c_s: f64,
    pub gamma_soak: f64,
    /// Θ above which the scarcity multiplier is relieved.
    pub relief_threshold: f64,
    /// Maximum fractional λ reduction at Θ = 3.
    pub relief_max_frac: f64,
}

impl Default for ThreatParams {
    fn default() -> Self {
        ThreatParams {
            q_rad_max_kw_m2: 200.0,
            t_ext_max_c: 500.0,
            dtorso_rate_max_c_s: 0.05,
            gamma_soak: 1.0,
            relief_threshold: 1.0,
            relief_max_frac: 0.8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Config {
    pub thermo: ThermoTable,
    pub scrubber: ScrubberParams,
    pub desiccant: DesiccantParams,
    pub vent: VentParams,
    pub tank: O2Tank,
    pub valve: ValveModel,
    pub metabolic: MetabolicParams,
    pub plant: PlantParams,
    pub sensors: SensorParams,
    pub ekf: EkfParams,
    pub mpc: MpcParams,
    pub cbf: CbfParams,
    pub pid: PidParams,
    pub modes: ModeParams,
    pub threat: ThreatParams,
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

impl Config {
    /// Defaults with the provenance annotations filled in.
    pub fn annotated_default() -> Config {
        let mut c = Config::default();
        c.provenance = provenance_map();
        c
    }

    pub fn from_file(path: &str) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_string(),
            source,
        })?;
        let cfg: Config = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_string(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if !(0.0..=1.0).contains(&self.scrubber.chi_w) {
            return bad(format!("scrubber.chi_w = {} not in [0,1]", self.scrubber.chi_w));
        }
        if !(self.scrubber.eps0 > 0.0 && self.scrubber.eps0 < 1.0) {
            return bad(format!("scrubber.eps0 = {} not in (0,1)", self.scrubber.eps0));
        }
        for (name, v) in [
            ("scrubber.k_ov_as_vbed", self.scrubber.k_ov_as_vbed),
            ("scrubber.v_bed", self.scrubber.v_bed),
            ("scrubber.d_p", self.scrubber.d_p),
            ("scrubber.rho_cp_bed", self.scrubber.rho_cp_bed),
            ("desiccant.k_ldf", self.desiccant.k_ldf),
            ("vent.k_cl", self.vent.k_cl),
            ("tank.mass_kg", self.tank.mass_kg),
            ("valve.m_dot_min", self.valve.m_dot_min),
        ] {
            if v <= 0.0 {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.desiccant.k_g > 0.0 && self.desiccant.k_g < 1.0) {
            return bad(format!("desiccant.k_g = {} not in (0,1)", self.desiccant.k_g));
        }
        if self.vent.v_cl_min >= self.vent.v_cl0 {
            return bad("vent.v_cl_min must be below vent.v_cl0".into());
        }
        if !(2.0..=5.0).contains(&self.valve.t_pwm) {
            return bad(format!("valve.t_pwm = {} not in [2,5] s", self.valve.t_pwm));
        }
        if !(0.7..=1.1).contains(&self.metabolic.rer) {
            return bad(format!("metabolic.rer = {} not in [0.7,1.1]", self.metabolic.rer));
        }
        if self.mpc.horizon < 1 || self.mpc.block < 1 {
            return bad("mpc.horizon and mpc.block must be >= 1".into());
        }
        if self.mpc.alpha <= 1.0 {
            return bad(format!("mpc.alpha = {} must be > 1", self.mpc.alpha));
        }
        for w in [
            self.mpc.w_safety,
            self.mpc.w_comfort,
            self.mpc.w_resource,
            self.mpc.w_smooth,
            self.mpc.w_decouple,
        ] {
            if w < 0.0 {
                return bad("mpc weights must be non-negative".into());
            }
        }
        for k in self.cbf.kappa {
            if !(k > 0.0 && k <= 1.0) {
                return bad(format!("cbf.kappa entry {k} not in (0,1]"));
            }
        }
        Ok(())
    }
}

fn provenance_map() -> BTreeMap<String, String> {
    let paper = |s: &str| format!("paper: {s}");
    let cal = "calibration".to_string();
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        m.insert(k.to_string(), v);
    };
    put("thermo.*", paper("formation enthalpies -393.5/-986.1/-1206.9/-285.8 kJ/mol"));
    put("scrubber.k_ov_as_vbed", format!("{cal}: holds ~2000 ppm at 0.068 mol/min CO2, default fan"));
    put("scrubber.f_dry", paper("0.82 dry mass fraction"));
    put("scrubber.f_caoh2", paper("0.77 Ca(OH)2 fraction of dry mass"));
    put("scrubber.eps0", paper("initial void fraction 0.40"));
    put("scrubber.chi_w", paper("baseline 0.3-0.5; default 0.4"));
    put("scrubber.d_p", paper("granule diameter 2-5 mm"));
    put("scrubber.p_co2_eq", paper("effectively zero for fresh soda lime"));
    put("scrubber.effectiveness_exponent", format!("{cal}: shrinking-core exponent 1.5"));
    put("scrubber.sorbent_mass_kg", paper("1 kg soda lime"));
    put("scrubber.v_bed | l_bed | rho_cp_bed | ua_wall", cal.clone());
    put("desiccant.q_m | c_g | k_g", paper("GAB 0.10 / 40 / 0.85 for Type A silica gel"));
    put("desiccant.dry_mass_kg", paper("1 kg silica gel"));
    put("desiccant.m_water_max_kg", paper("~350 g water capacity"));
    put("desiccant.dh_ads_kj_per_kg", paper("2500-2600 kJ/kg; midpoint 2550"));
    put("desiccant.e_qm_j_per_mol", paper("fit: q_m drops ~40% from 25 to 50 C"));
    put("desiccant.k_ldf | rho_cp_bed | v_bed | ua_wall", cal.clone());
    put("vent.p_crack", paper("P_a + ~5 mbar cracking pressure"));
    put("vent.k_cl", paper("compliant bellows 50-200 Pa/L"));
    put("vent.v_cl_min", paper("1-2 L breathing margin"));
    put("vent.c_d | a_v | v_cl0 | v_cl_max", cal.clone());
    put("tank.mass_kg", paper("3.0 kg usable O2"));
    put("tank.volume_l", paper("11.7 L cylinder"));
    put("tank.fill_pressure_bar", paper("200 bar"));
    put("tank.z", paper("Z ~ 0.95 at 200 bar, 300 K"));
    put("valve.t_pwm", paper("PWM period 2-5 s"));
    put("valve.m_dot_min", paper("minimum open flow 5-15% of full scale"));
    put("valve.*", cal.clone());
    put("metabolic.vo2_rest", paper("0.25 L/min resting uptake"));
    put("metabolic.gamma | beta", format!("{cal}: W=500 lands at the elite peak band"));
    put("metabolic.rer", paper("R ~ 0.85 at moderate exertion"));
    put("metabolic.hypox_onset_atm", paper("chemoreceptor activation below ~0.18 atm"));
    put("metabolic.*", cal.clone());
    put("plant.n_total_init", paper("loop inventory ~4 mol"));
    put("plant.x_o2_init | x_co2_init", paper("air fill: 21% O2, 400 ppm CO2"));
    put("plant.fan_full_scale_l_min", paper("fan specified to at least 400 L/min"));
    put("plant.*", cal.clone());
    put("sensors.*", paper("sensor tables: quoted range/resolution per channel"));
    put("ekf.*", cal.clone());
    put("mpc.horizon | block", paper("15-20 steps with move blocking (3-5)"));
    put("mpc.dt", paper("control interval 1 s"));
    put("mpc.alpha", paper("alpha > 1 scarcity law"));
    put("mpc.rh_setpoint_pct | t_comfort_c", paper("comfort RH 40%, T 28 C"));
    put("mpc.band_x_co2", paper("penalty onset well below 5000 ppm, target ~2000 ppm"));
    put("mpc.rh_thresh_pct", format!("{cal}: RH threshold 60% (suit constraint boundary)"));
    put("mpc.deadline_ms", paper("100 ms real-time deadline"));
    put("mpc.uptd_max", format!("{cal}: UPTD budget 300"));
    put("mpc.w_* | lambda0 | qp_max_iters | vent_softness_pa", cal.clone());
    put("cbf.kappa", format!("{cal}: 0.2 each, discrete-time validity in (0,1]"));
    put("cbf.p_io2_min_atm", paper("hard hypoxia limit 0.16 atm, wet basis"));
    put("cbf.x_co2_cap_cascade", paper("cascade floor x_CO2 <= 3%"));
    put("cbf.deadline_ms", paper("CBF-QP < 1 ms"));
    put("pid.*", format!("{cal}: Ziegler-Nichols-style tuning on the steady 250 W scenario, frozen"));
    put("modes.conservation_frac", paper("below 25% remaining"));
    put("modes.emergency_frac", paper("below 10% remaining"));
    put("modes.hysteresis_frac", format!("{cal}: 5 percentage points"));
    put("modes.danger_*", cal.clone());
    put("threat.q_rad_max_kw_m2", paper("0-200 kW/m2 sensor range"));
    put("threat.t_ext_max_c", paper("external thermistor to +500 C"));
    put("threat.*", cal);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let c = Config::annotated_default();
        c.validate().unwrap();
        let json = serde_json::to_string_pretty(&c).unwrap();
        let back: Config = serde_json::from_str(&json).unwrap();
        back.validate().unwrap();
        assert_eq!(back.plant.n_total_init, c.plant.n_total_init);
        assert!(!back.provenance.is_empty());
    }

    #[test]
    fn validation_rejects_out_of_range() {
        let mut c = Config::default();
        c.scrubber.chi_w = 1.5;
        assert!(c.validate().is_err());

        let mut c = Config::default();
        c.mpc.alpha = 1.0;
        assert!(c.validate().is_err());

        let mut c = Config::default();
        c.cbf.kappa[2] = 0.0;
        assert!(c.validate().is_err());
    }
}
