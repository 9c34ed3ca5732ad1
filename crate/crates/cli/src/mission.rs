//! The mission execution loop: sense → estimate → mode → control → safety
//! filter → actuate → integrate, with per-tick trace logging.

use crate::scenario::ScenarioScript;
use crate::trace::{summarize, MissionSummary, TraceRow};
use std::time::Instant;
use suitloop_core::config::Config;
use suitloop_core::control::{
    barriers, cbf_filter, lambda_with_relief, scarcity_lambda, thermal_threat, ControlContext,
    Controller, ControllerRegistry, Mode, ModeInputs, ModeManager,
};
use suitloop_core::estim::{Ekf, Estimate, ScrubberHealth, SealMonitor, SealStatus};
use suitloop_core::gas::PwmPlanner;
use suitloop_core::physio::pio2_wet;
use suitloop_core::plant::{
    initial_state, median_vote, rk4_step, sense, ControlInput, Disturbance, FlowAudit,
    PlantModel, PlantState, RngStreams, SensorFaults,
};

#[derive(Debug)]
pub enum MissionError {
    UnknownController(String),
}

impl std::fmt::Display for MissionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MissionError::UnknownController(name) => {
                write!(f, "unknown controller '{name}'")
            }
        }
    }
}

impl std::error::Error for MissionError {}

pub struct MissionOutput {
    pub trace: Vec<TraceRow>,
    pub summary: MissionSummary,
    pub audit: FlowAudit,
}

pub struct MissionOptions {
    pub raw_pid: bool,
}

impl Default for MissionOptions {
    fn default() -> Self {
        MissionOptions { raw_pid: false }
    }
}

/// Run one mission to its duration cap, O2 depletion, or a plant fault.
pub fn run_mission(
    scenario: &ScenarioScript,
    controller_name: &str,
    cfg: &Config,
    seed: u64,
    opts: &MissionOptions,
) -> Result<MissionOutput, MissionError> {
    let registry = ControllerRegistry::with_builtin();
    let mut controller = registry
        .create(controller_name, cfg)
        .ok_or_else(|| MissionError::UnknownController(controller_name.to_string()))?;
    Ok(run_with_controller(scenario, controller.as_mut(), cfg, seed, opts))
}

pub fn run_with_controller(
    scenario: &ScenarioScript,
    controller: &mut dyn Controller,
    cfg: &Config,
    seed: u64,
    opts: &MissionOptions,
) -> MissionOutput {
    let dt = cfg.mpc.dt;
    let raw_pid = opts.raw_pid;
    let truth_model = PlantModel::truth(cfg);
    let ekf = Ekf::new(cfg.ekf.clone(), &cfg.sensors);

    let mut rng = RngStreams::from_seed(seed);
    let mut truth = initial_state(cfg);
    let mut est = Estimate::new(truth, &cfg.ekf);
    let mut health = ScrubberHealth::default();
    let mut seal = SealMonitor::default();
    let mut modes = ModeManager::default();
    let mut pwm = PwmPlanner::default();
    let mut audit = FlowAudit::default();

    let tank0 = cfg.tank.mass_kg;
    let caoh2_0 = cfg.scrubber.caoh2_initial_kg();
    let m_water_max = cfg.desiccant.m_water_max_kg;

    let mut u_applied = ControlInput {
        m_dot_o2: 0.0,
        fan: 0.5,
        bypass: 0.0,
    };
    let mut d_hat_prev: Option<Disturbance> = None;
    let mut torso_prev = est.x_hat.t_torso;
    let mut torso_slope = 0.0;

    let cap_ticks = (scenario.duration_cap_min * 60.0 / dt).round() as usize;
    let mut t_predict = std::time::Duration::ZERO;
    let mut t_update = std::time::Duration::ZERO;
    let mut t_decide = std::time::Duration::ZERO;
    let mut t_cbf = std::time::Duration::ZERO;
    let mut t_truth = std::time::Duration::ZERO;
    let mut n_status: std::collections::BTreeMap<String, usize> = Default::default();
    let debug_timing = std::env::var("SUITLOOP_TIMING").is_ok();
    let mut rows: Vec<TraceRow> = Vec::with_capacity(cap_ticks + 1);
    let mut fault: Option<String> = None;
    let mut last_mode = Mode::Normal;
    let mut last_theta = 0.0;
    let mut last_lambda = cfg.mpc.lambda0;
    let mut last_seal = SealStatus::Nominal;
    let mut last_cand_delta = [0.0; 3];
    let mut last_solver = "init".to_string();

    for k in 0..cap_ticks {
        let t = k as f64 * dt;

        // Scripted disturbances; the movement draw happens every tick so
        // paired runs consume identical streams.
        let movement =
            scenario.activity.at(t) * cfg.plant.movement_osc_l_per_activity * rng.movement_factor();
        let d_true = Disturbance {
            w: scenario.work_w.at(t),
            t_ext: scenario.t_ext_c.at(t),
            q_rad: scenario.q_rad_kw_m2.at(t),
            c_toxic: scenario.toxic_ppm.at(t),
            p_a: scenario.p_a_pa.at(t),
            movement_osc_l: movement,
            leak_area_m2: scenario.leak_area_at(t),
        };
        let faults = SensorFaults {
            o2_cell: scenario.faults.o2_cell,
        };
        let frame = sense(
            &truth_model,
            &truth,
            &u_applied,
            &d_true,
            &faults,
            t,
            &cfg.sensors,
            &mut rng.sensor,
        );

        // Controller-side prediction model with the current health derate.
        let eta_corr = health.correction();
        let pred_model = PlantModel::with_eta_correction(cfg, eta_corr);

        // Estimate: predict with the previous command and held disturbance,
        // then fuse this tick's frame.
        if let Some(d_prev) = d_hat_prev {
            let t0 = Instant::now();
            est = ekf.predict(&pred_model, &est, &u_applied, &d_prev, dt);
            t_predict += t0.elapsed();
        }
        let d_hat = Disturbance {
            w: est.x_hat.w_hat,
            t_ext: frame.t_ext_c,
            q_rad: frame.q_rad_kw_m2,
            c_toxic: frame.toxic_ppm,
            p_a: frame.p_a_pa,
            movement_osc_l: frame.accel_torso_g * cfg.plant.movement_osc_l_per_activity,
            leak_area_m2: 0.0,
        };
        let predicted_co2 = ekf.measure(&pred_model, &est.x_hat, &u_applied, &d_hat)[0];
        let t0 = Instant::now();
        est = ekf.update(&pred_model, &est, &frame, &u_applied, &d_hat);
        t_update += t0.elapsed();

        let residual = frame.x_co2 - predicted_co2;
        health.push(
            residual,
            est.p.trace() > cfg.ekf.trace_suspend_threshold,
        );

        // Anomaly detectors.
        let vote = median_vote(frame.x_o2_cells);
        seal.push(t, frame.dp_suit_pa, vote.value / 100.0);
        last_seal = seal.status(frame.toxic_ppm);

        // Mode management from the estimate.
        let est_obs = pred_model.observables(&est.x_hat, &u_applied, &d_hat);
        let mode_inputs = ModeInputs {
            tank_frac: (est.x_hat.m_tank / tank0).clamp(0.0, 1.0),
            sorbent_frac: (est.x_hat.m_caoh2 / caoh2_0).clamp(0.0, 1.0),
            desiccant_frac: ((m_water_max - est.x_hat.m_water) / m_water_max).clamp(0.0, 1.0),
            p_io2_atm: est_obs.p_io2_atm,
            x_o2: est_obs.x_o2,
            x_co2: est_obs.x_co2,
            hr_bpm: est.x_hat.hr,
            t_core_c: est.x_hat.t_core,
            t_bed_c: est.x_hat.t_bed,
            sensor_fault: est.o2_vote_fault || last_seal == SealStatus::Breach,
        };
        last_mode = modes.update(&cfg.modes, &mode_inputs);
        let x_o2_max = modes.x_o2_max();
        let co2_cap = if last_mode >= Mode::Emergency {
            cfg.cbf.x_co2_cap_cascade
        } else {
            cfg.cbf.x_co2_cap_normal
        };

        // Scarcity pressure with thermal-threat relief.
        torso_slope += 0.2 * ((est.x_hat.t_torso - torso_prev) / dt - torso_slope);
        torso_prev = est.x_hat.t_torso;
        last_theta = thermal_threat(frame.q_rad_kw_m2, frame.t_ext_c, torso_slope, &cfg.threat);
        let lambda_raw = scarcity_lambda(
            est.x_hat.m_tank,
            tank0,
            cfg.mpc.lambda0,
            cfg.mpc.alpha,
            cfg.mpc.lambda_max,
        );
        last_lambda = lambda_with_relief(lambda_raw, last_theta, &cfg.threat);

        // Candidate command and the final safety filter.
        let now = Instant::now();
        let ctx = ControlContext {
            cfg,
            model: &pred_model,
            x_hat: &est.x_hat,
            frame: &frame,
            d_hat: &d_hat,
            mode: last_mode,
            x_o2_max,
            lambda: last_lambda,
            u_prev: &u_applied,
            now,
        };
        let t0 = Instant::now();
        let decision = controller.decide(&ctx);
        t_decide += t0.elapsed();
        last_solver = decision.solver.as_str().to_string();
        *n_status.entry(last_solver.clone()).or_insert(0) += 1;
        let t0 = Instant::now();
        let u_safe = if raw_pid {
            decision
                .u_cand
                .clamp_to(&cfg.mpc.u_min, &cfg.mpc.u_max)
        } else {
            cbf_filter(
                &pred_model,
                &est.x_hat,
                &decision.u_cand,
                &d_hat,
                x_o2_max,
                co2_cap,
                dt,
                now,
            )
            .u_safe
        };
        t_cbf += t0.elapsed();
        last_cand_delta = [
            decision.u_cand.m_dot_o2 - u_safe.m_dot_o2,
            decision.u_cand.fan - u_safe.fan,
            decision.u_cand.bypass - u_safe.bypass,
        ];

        // Actuation: the PWM planner realizes sub-minimum average flows.
        let plan = pwm.plan(u_safe.m_dot_o2, &cfg.valve);
        u_applied = ControlInput {
            m_dot_o2: plan.average_flow,
            fan: u_safe.fan,
            bypass: u_safe.bypass,
        };

        rows.push(make_row(
            t,
            &truth,
            &est.x_hat,
            &u_applied,
            last_cand_delta,
            last_mode,
            last_theta,
            last_lambda,
            &audit,
            &truth_model,
            &d_true,
            &last_solver,
            last_seal,
            cfg,
        ));

        // Advance the truth plant.
        let t0 = Instant::now();
        match rk4_step(&truth_model, &truth, &u_applied, &d_true, dt) {
            Ok((next, diag)) => {
                audit.add(&diag.audit);
                truth = next;
            }
            Err(e) => {
                fault = Some(e.to_string());
                break;
            }
        }
        t_truth += t0.elapsed();
        d_hat_prev = Some(d_hat);

        if truth.m_tank <= 1e-4 {
            // O2 depleted (the valve can no longer deliver): close the
            // trace with the terminal state.
            break;
        }
    }

    // Terminal row.
    let t_end = rows.len() as f64 * dt;
    let d_end = Disturbance {
        w: scenario.work_w.at(t_end),
        t_ext: scenario.t_ext_c.at(t_end),
        q_rad: scenario.q_rad_kw_m2.at(t_end),
        c_toxic: scenario.toxic_ppm.at(t_end),
        p_a: scenario.p_a_pa.at(t_end),
        movement_osc_l: 0.0,
        leak_area_m2: scenario.leak_area_at(t_end),
    };
    rows.push(make_row(
        t_end,
        &truth,
        &est.x_hat,
        &u_applied,
        last_cand_delta,
        last_mode,
        last_theta,
        last_lambda,
        &audit,
        &truth_model,
        &d_end,
        &last_solver,
        last_seal,
        cfg,
    ));

    if debug_timing {
        eprintln!(
            "timing over {} ticks: predict {:?} update {:?} decide {:?} cbf {:?} truth {:?} statuses {:?}",
            rows.len(), t_predict, t_update, t_decide, t_cbf, t_truth, n_status
        );
    }
    let summary = summarize(&scenario.name, controller.name(), seed, &rows, fault);
    MissionOutput {
        trace: rows,
        summary,
        audit,
    }
}

#[allow(clippy::too_many_arguments)]
fn make_row(
    t: f64,
    truth: &PlantState,
    estimate: &PlantState,
    u_applied: &ControlInput,
    cand_delta: [f64; 3],
    mode: Mode,
    theta: f64,
    lambda: f64,
    audit: &FlowAudit,
    truth_model: &PlantModel,
    d: &Disturbance,
    solver: &str,
    seal: SealStatus,
    cfg: &Config,
) -> TraceRow {
    let obs = truth_model.observables(truth, u_applied, d);
    let p_io2 = pio2_wet(obs.p_s, truth.t_bz, obs.rh_pct, obs.x_o2);
    let margins = [
        truth.m_tank,
        truth.m_caoh2,
        cfg.desiccant.m_water_max_kg - truth.m_water,
        (p_io2 - 0.19).min(0.50 - p_io2),
        0.235 - truth.x_o2,
        0.005 - obs.x_co2,
        60.0 - obs.rh_pct,
        truth.v_cl - cfg.vent.v_cl_min,
        cfg.mpc.uptd_max - truth.uptd,
    ];
    // Barrier bookkeeping is part of the row contract even though the CBF
    // itself runs on the estimate.
    let _ = barriers(
        truth_model,
        truth,
        u_applied,
        d,
        0.235,
        cfg.cbf.x_co2_cap_normal,
        cfg.cbf.uptd_max,
    );
    TraceRow {
        t_s: t,
        truth: *truth,
        estimate: *estimate,
        u_applied: *u_applied,
        cand_delta,
        mode: mode.as_str().to_string(),
        margins,
        theta,
        lambda,
        vent_cum_mol: audit.vented_total,
        p_io2_atm: p_io2,
        rh_pct: obs.rh_pct,
        x_co2: obs.x_co2,
        p_s_pa: obs.p_s,
        solver: solver.to_string(),
        seal: seal.as_str().to_string(),
    }
}
