//! Receding-horizon LTV-MPC: nonlinear rollout for linearization points,
//! exact ZOH discretization per move block, a condensed QP over the
//! blocked inputs with slack-backed soft constraints, and the dynamic
//! resource-scarcity cost on predicted venting.

use super::linearize::{linearize, zoh_affine, DiscreteModel};
use super::qp::{solve_qp, QpOptions, QpStatus};
use crate::config::{Config, MpcParams, SoftBand};
use crate::gas::{phase_averaged_vent, suit_pressure, vent_rate};
use crate::plant::{rk4_step, ControlInput, Disturbance, PlantModel, PlantState, idx, STATE_DIM};
use nalgebra::{DMatrix, DVector};
use std::time::Instant;

/// Scarcity multiplier λ = λ0 (m_init/m_now)^α, saturating at λ_max; a
/// depleted tank pins the multiplier at the ceiling (the mode manager owns
/// depletion handling).
pub fn scarcity_lambda(m_now: f64, m_init: f64, lambda0: f64, alpha: f64, lambda_max: f64) -> f64 {
    if m_now <= 0.0 {
        return lambda_max;
    }
    (lambda0 * (m_init / m_now).powf(alpha)).min(lambda_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpcStatus {
    Optimal,
    DeadlineExceeded,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct MpcSolve {
    pub u: ControlInput,
    pub status: MpcStatus,
    /// Predicted state trajectory at the solution (affine model).
    pub predicted: Vec<DVector<f64>>,
    pub qp_sweeps: usize,
}

/// The five cost contributions, evaluated on an actual trajectory with the
/// real (unsmoothed) vent law.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CostTerms {
    pub safety: f64,
    pub comfort: f64,
    pub resource: f64,
    pub smoothness: f64,
    pub decouple: f64,
}

impl CostTerms {
    pub fn total(&self) -> f64 {
        self.safety + self.comfort + self.resource + self.smoothness + self.decouple
    }
}

fn hinge_above(value: f64, band: &SoftBand) -> f64 {
    match band.max {
        Some(max) => ((value - max) / (max - band.nominal).abs().max(1e-9)).max(0.0),
        None => 0.0,
    }
}

fn hinge_below(value: f64, band: &SoftBand) -> f64 {
    match band.min {
        Some(min) => ((min - value) / (band.nominal - min).abs().max(1e-9)).max(0.0),
        None => 0.0,
    }
}

/// Evaluate the cost terms over a trajectory of plant states and blocked
/// inputs (one input per state transition).
pub fn mpc_cost_terms(
    model: &PlantModel,
    states: &[PlantState],
    inputs: &[ControlInput],
    u_prev: &ControlInput,
    d: &Disturbance,
    lambda: f64,
    p: &MpcParams,
) -> CostTerms {
    let mut terms = CostTerms::default();
    for (i, x) in states.iter().enumerate() {
        let u = inputs.get(i.min(inputs.len().saturating_sub(1))).unwrap_or(u_prev);
        let obs = model.observables(x, u, d);
        // Safety: one-sided quadratic hinges in normalized margin.
        let mut s = 0.0;
        s += hinge_below(obs.p_io2_atm, &p.band_p_io2).powi(2);
        s += hinge_above(obs.p_io2_atm, &p.band_p_io2).powi(2);
        s += hinge_above(obs.x_o2, &p.band_x_o2).powi(2);
        s += hinge_above(obs.x_co2, &p.band_x_co2).powi(2);
        s += hinge_above(obs.rh_pct, &p.band_rh).powi(2);
        s += hinge_above(x.t_bed, &p.band_t_bed).powi(2);
        s += hinge_above(x.t_core, &p.band_t_core).powi(2);
        terms.safety += p.w_safety * s;
        // Comfort: quadratic deviation from ideal breathing conditions.
        let c = ((obs.rh_pct - p.rh_setpoint_pct) / 20.0).powi(2)
            + ((x.t_bz - p.t_comfort_c) / 10.0).powi(2);
        terms.comfort += p.w_comfort * c;
        // Resource: λ · vent rate (real orifice law).
        let tidal = model.tidal_amplitude_l(d.w);
        let osc = (tidal * tidal + d.movement_osc_l * d.movement_osc_l).sqrt();
        let n_tot = x.n_total().max(1e-9);
        let mean_m = x.inventory().mean_molar_mass();
        let rho = obs.p_s * mean_m / (crate::constants::R_GAS * crate::constants::kelvin(x.t_bz));
        let vent = phase_averaged_vent(x.v_cl, osc, d.p_a, rho, mean_m, &model.cfg.vent);
        let _ = n_tot;
        terms.resource += p.w_resource * lambda * vent * p.dt;
    }
    for (i, u) in inputs.iter().enumerate() {
        let prev = if i == 0 { u_prev } else { &inputs[i - 1] };
        let du = [
            u.m_dot_o2 - prev.m_dot_o2,
            u.fan - prev.fan,
            u.bypass - prev.bypass,
        ];
        terms.smoothness += p.w_smooth * du.iter().map(|v| v * v).sum::<f64>();
        // Decoupling: fan-speed increases are penalized only when humidity
        // already exceeds the threshold.
        if let Some(x) = states.get(i) {
            let obs = model.observables(x, u, d);
            let rh_excess = (obs.rh_pct / 100.0 - p.rh_thresh_pct / 100.0).max(0.0);
            let dfan_up = (u.fan - prev.fan).max(0.0);
            terms.decouple += p.w_decouple * rh_excess * dfan_up;
        }
    }
    terms
}

/// Affine prediction over the horizon: x_i = c_i + G_i z with z the stacked
/// block inputs.
pub struct LtvPrediction {
    /// Per step 0..=N: constant part.
    pub c: Vec<DVector<f64>>,
    /// Per step 0..=N: sensitivity to z (n × 3·n_blocks).
    pub g: Vec<DMatrix<f64>>,
}

/// Build the prediction matrices from per-step discrete models and the
/// step → block map.
pub fn build_prediction(
    models: &[DiscreteModel],
    block_of_step: &[usize],
    n_blocks: usize,
    x0: &DVector<f64>,
    m: usize,
) -> LtvPrediction {
    let n = x0.len();
    let nz = m * n_blocks;
    let mut c = vec![x0.clone()];
    let mut g = vec![DMatrix::zeros(n, nz)];
    for (i, dm) in models.iter().enumerate() {
        let b = block_of_step[i];
        let mut gi = &dm.a_d * &g[i];
        gi.view_mut((0, b * m), (n, m)).add_assign(&dm.b_d);
        let ci = &dm.a_d * &c[i] + &dm.g_d;
        g.push(gi);
        c.push(ci);
    }
    LtvPrediction { c, g }
}

use std::ops::AddAssign;

/// Smoothed vent rate used for cost gradients: the real rectified orifice
/// flow plus an exponential tail below the cracking threshold, so the
/// optimizer feels approaching venting before it starts.
fn soft_vent(model: &PlantModel, x: &PlantState, d: &Disturbance, softness_pa: f64) -> f64 {
    let cfg = model.cfg;
    let n_tot = x.n_total().max(1e-9);
    let _ = n_tot;
    let mean_m = x.inventory().mean_molar_mass();
    let p_s = suit_pressure(x.v_cl, d.p_a, &cfg.vent);
    let rho = p_s * mean_m / (crate::constants::R_GAS * crate::constants::kelvin(x.t_bz));
    let tidal = model.tidal_amplitude_l(d.w);
    let osc = (tidal * tidal + d.movement_osc_l * d.movement_osc_l).sqrt();
    let real = phase_averaged_vent(x.v_cl, osc, d.p_a, rho, mean_m, &cfg.vent);
    let margin = (cfg.vent.p_crack - p_s).max(0.0);
    let v_ref = vent_rate(cfg.vent.p_crack + softness_pa, rho, mean_m, &cfg.vent);
    real + v_ref * (-margin / softness_pa).exp() * if margin > 0.0 { 1.0 } else { 0.0 }
}

/// States the algebraic loop observables actually depend on: the four
/// species inventories, the counter-lung volume, and the breathing-zone
/// temperature.
const OBS_STATES: [usize; 6] = [idx::N_O2, idx::N_CO2, idx::N_H2O, idx::N_N2, idx::V_CL, idx::T_BZ];

/// Finite-difference gradient of a scalar observable over the states it
/// can depend on; the remaining partials are structurally zero.
fn fd_state_gradient<F: Fn(&PlantState) -> f64>(
    f: F,
    x: &PlantState,
    scales: &[f64; STATE_DIM],
) -> DVector<f64> {
    let f0 = f(x);
    let xv = x.to_vector();
    let mut grad = DVector::zeros(STATE_DIM);
    for &j in OBS_STATES.iter() {
        let h = 1e-6 * scales[j].max(1e-9) + 1e-8 * xv[j].abs();
        let mut xp = xv.clone();
        xp[j] += h;
        grad[j] = (f(&PlantState::from_vector(&xp)) - f0) / h;
    }
    grad
}

pub struct MpcController {
    p: MpcParams,
    warm: Option<Vec<ControlInput>>,
}

impl MpcController {
    pub fn new(p: MpcParams) -> Self {
        MpcController { p, warm: None }
    }

    pub fn reset(&mut self) {
        self.warm = None;
    }

    fn n_blocks(&self) -> usize {
        self.p.horizon.div_ceil(self.p.block)
    }

    /// Solve one receding-horizon step. `x_o2_max` carries the
    /// mode-dependent fire-safety bound and `lambda` the threat-relieved
    /// scarcity multiplier; `cold_start` seeds the rollout when no
    /// previous solution exists.
    #[allow(clippy::too_many_arguments)]
    pub fn solve(
        &mut self,
        model: &PlantModel,
        x_hat: &PlantState,
        d_hat: &Disturbance,
        u_prev: &ControlInput,
        x_o2_max: f64,
        lambda: f64,
        cold_start: &ControlInput,
        now: Instant,
    ) -> MpcSolve {
        let p = self.p.clone();
        let cfg: &Config = model.cfg;
        let n_blocks = self.n_blocks();
        let m = 3usize;
        let nz_u = m * n_blocks;
        let deadline = now + std::time::Duration::from_micros((p.deadline_ms * 1000.0) as u64);

        let ws: Vec<ControlInput> = match &self.warm {
            Some(w) if w.len() == n_blocks => w.clone(),
            _ => vec![*cold_start; n_blocks],
        };

        // Nonlinear rollout along the warm-start inputs for linearization
        // points, discretizing once per move block.
        let mut rollout = vec![*x_hat];
        let mut models: Vec<DiscreteModel> = Vec::with_capacity(p.horizon);
        let mut block_of_step = Vec::with_capacity(p.horizon);
        let mut block_models: Vec<Option<DiscreteModel>> = vec![None; n_blocks];
        let mut x = *x_hat;
        for i in 0..p.horizon {
            let b = (i / p.block).min(n_blocks - 1);
            block_of_step.push(b);
            let u = ws[b].clamp_to(&p.u_min, &p.u_max);
            if block_models[b].is_none() {
                let aff = match linearize(model, &x, &u, d_hat, &cfg.ekf.fd_scale, cfg.ekf.fd_rel_step)
                {
                    Ok(a) => a,
                    Err(_) => return self.fail(x_hat, u_prev, MpcStatus::Infeasible),
                };
                match zoh_affine(&aff, p.dt) {
                    Ok(dm) => block_models[b] = Some(dm),
                    Err(_) => return self.fail(x_hat, u_prev, MpcStatus::Infeasible),
                }
            }
            models.push(block_models[b].clone().unwrap());
            match rk4_step(model, &x, &u, d_hat, p.dt) {
                Ok((nx, _)) => x = nx,
                Err(_) => return self.fail(x_hat, u_prev, MpcStatus::Infeasible),
            }
            rollout.push(x);
        }

        let pred = build_prediction(&models, &block_of_step, n_blocks, &x_hat.to_vector(), m);

        // Soft-constraint slacks are created lazily: only at steps where
        // the rollout sits above the nominal point of a band (stride 2 with
        // doubled weight keeps the cost scale), so the nominal-operation QP
        // stays small.

        // Costs and rows are first assembled in the input space (nz_u wide)
        // plus a list of slack specs; slack columns are appended afterward.
        let mut h_u = DMatrix::zeros(nz_u, nz_u);
        let mut f_u = DVector::zeros(nz_u);
        let mut rows_a: Vec<DVector<f64>> = Vec::new(); // nz_u-wide rows
        let mut rows_b: Vec<f64> = Vec::new();
        let mut row_labels: Vec<&'static str> = Vec::new();
        let mut push_row = |a: DVector<f64>, b: f64, label: &'static str| {
            rows_a.push(a);
            rows_b.push(b);
            row_labels.push(label);
        };

        // Input box constraints per block.
        for b in 0..n_blocks {
            for j in 0..m {
                let mut lo = DVector::zeros(nz_u);
                lo[b * m + j] = -1.0;
                push_row(lo, -p.u_min[j], "u_box");
                let mut hi = DVector::zeros(nz_u);
                hi[b * m + j] = 1.0;
                push_row(hi, p.u_max[j], "u_box");
            }
        }

        // Smoothness cost across blocks (and against the applied input).
        let du_scale = [1.0, 1.0, 1.0];
        for b in 0..n_blocks {
            for j in 0..m {
                let w = p.w_smooth * du_scale[j];
                let i1 = b * m + j;
                h_u[(i1, i1)] += 2.0 * w;
                if b == 0 {
                    let prev = [u_prev.m_dot_o2, u_prev.fan, u_prev.bypass][j];
                    f_u[i1] += -2.0 * w * prev;
                } else {
                    let i0 = (b - 1) * m + j;
                    h_u[(i0, i0)] += 2.0 * w;
                    h_u[(i0, i1)] += -2.0 * w;
                    h_u[(i1, i0)] += -2.0 * w;
                }
            }
        }

        let scales = &cfg.ekf.fd_scale;

        // Per-step rows and costs. Slack specs collect (weight, linear
        // cost, nz_u row, rhs) tuples and become appended columns.
        struct SlackSpec {
            quad_w: f64,
            lin_w: f64,
            row: DVector<f64>,
            rhs: f64,
        }
        let mut slacks: Vec<SlackSpec> = Vec::new();

        for i in 1..=p.horizon {
            let xb = &rollout[i];
            let gi = &pred.g[i];
            let ci = &pred.c[i];
            let xbv = xb.to_vector();
            let u_roll = &ws[block_of_step[i - 1]];
            // Linearized observable: value(z) ≈ v0 + off + row·z.
            let lin_row = |grad: &DVector<f64>| -> (DVector<f64>, f64) {
                let gt = grad.transpose() * gi;
                let row = DVector::from_fn(nz_u, |k, _| gt[(0, k)]);
                let off = grad.dot(&(ci - &xbv));
                (row, off)
            };
            let state_row = |s_idx: usize| -> DVector<f64> {
                DVector::from_fn(nz_u, |k, _| gi[(s_idx, k)])
            };

            let obs0 = model.observables(xb, u_roll, d_hat);
            let d_loc = *d_hat;
            let grad_p_io2 =
                fd_state_gradient(|s| model.observables(s, u_roll, &d_loc).p_io2_atm, xb, scales);
            let (row_p_io2, off_p_io2) = lin_row(&grad_p_io2);

            // Hard rows: mode-keyed fire-safety bound, wet-basis hypoxia
            // floor, counter-lung breathing margin.
            push_row(state_row(idx::X_O2), x_o2_max - ci[idx::X_O2], "x_o2_fire");
            let floor = cfg.cbf.p_io2_min_atm + cfg.cbf.margin_p_io2_atm;
            push_row(-row_p_io2.clone(), obs0.p_io2_atm + off_p_io2 - floor, "p_io2_floor");
            push_row(
                -state_row(idx::V_CL),
                ci[idx::V_CL] - (cfg.vent.v_cl_min + cfg.cbf.margin_v_cl_l),
                "v_cl_margin",
            );
            if i == p.horizon {
                // Monotone consumable and dose budgets: last step binds.
                push_row(-state_row(idx::M_TANK), ci[idx::M_TANK], "tank");
                push_row(-state_row(idx::M_CAOH2), ci[idx::M_CAOH2], "sorbent");
                push_row(
                    state_row(idx::M_WATER),
                    cfg.desiccant.m_water_max_kg - ci[idx::M_WATER],
                    "water_cap",
                );
                push_row(state_row(idx::UPTD), p.uptd_max - ci[idx::UPTD], "uptd");
            }

            // Resource: λ · smoothed vent, linearized (pure linear term).
            {
                let grad = fd_state_gradient(
                    |s| soft_vent(model, s, &d_loc, p.vent_softness_pa),
                    xb,
                    scales,
                );
                let (row, _off) = lin_row(&grad);
                f_u += row * (p.w_resource * lambda * p.dt);
            }

            // Soft hinges and comfort terms at every other step (doubled
            // weight preserves the cost scale); activation is decided on
            // the rollout so nominal operation carries no slack columns.
            if i % 2 == 0 || i == p.horizon {
                let stride_w = 2.0;
                let w_soft = p.w_safety * stride_w;

                if let Some(min) = p.band_p_io2.min {
                    if obs0.p_io2_atm < p.band_p_io2.nominal {
                        let den = (p.band_p_io2.nominal - min).max(1e-9);
                        slacks.push(SlackSpec {
                            quad_w: w_soft,
                            lin_w: 0.0,
                            row: -&row_p_io2 / den,
                            rhs: (obs0.p_io2_atm + off_p_io2 - min) / den,
                        });
                    }
                }
                if let Some(max) = p.band_x_co2.max {
                    if obs0.x_co2 > p.band_x_co2.nominal * 0.5 {
                        let grad = fd_state_gradient(
                            |s| model.observables(s, u_roll, &d_loc).x_co2,
                            xb,
                            scales,
                        );
                        let (row, off) = lin_row(&grad);
                        let den = (max - p.band_x_co2.nominal).max(1e-9);
                        slacks.push(SlackSpec {
                            quad_w: w_soft,
                            lin_w: 0.0,
                            row: row / den,
                            rhs: (max - obs0.x_co2 - off) / den,
                        });
                    }
                }
                // RH enters both the high-humidity hinge and the comfort
                // quadratic; one gradient serves both.
                let grad_rh = fd_state_gradient(
                    |s| model.observables(s, u_roll, &d_loc).rh_pct,
                    xb,
                    scales,
                );
                let (row_rh, off_rh) = lin_row(&grad_rh);
                if let Some(max) = p.band_rh.max {
                    if obs0.rh_pct > p.band_rh.nominal {
                        let den = (max - p.band_rh.nominal).max(1e-9);
                        slacks.push(SlackSpec {
                            quad_w: w_soft,
                            lin_w: 0.0,
                            row: &row_rh / den,
                            rhs: (max - obs0.rh_pct - off_rh) / den,
                        });
                    }
                }
                if let Some(max) = p.band_t_bed.max {
                    if ci[idx::T_BED] > p.band_t_bed.nominal {
                        let den = (max - p.band_t_bed.nominal).max(1e-9);
                        slacks.push(SlackSpec {
                            quad_w: w_soft,
                            lin_w: 0.0,
                            row: state_row(idx::T_BED) / den,
                            rhs: (max - ci[idx::T_BED]) / den,
                        });
                    }
                }
                if let Some(max) = p.band_t_core.max {
                    if ci[idx::T_CORE] > p.band_t_core.nominal {
                        let den = (max - p.band_t_core.nominal).max(1e-9);
                        slacks.push(SlackSpec {
                            quad_w: w_soft,
                            lin_w: 0.0,
                            row: state_row(idx::T_CORE) / den,
                            rhs: (max - ci[idx::T_CORE]) / den,
                        });
                    }
                }
                if let Some(max) = p.band_x_o2.max {
                    if ci[idx::X_O2] > p.band_x_o2.nominal {
                        let den = (max - p.band_x_o2.nominal).max(1e-9);
                        slacks.push(SlackSpec {
                            quad_w: w_soft,
                            lin_w: 0.0,
                            row: state_row(idx::X_O2) / den,
                            rhs: (max - ci[idx::X_O2]) / den,
                        });
                    }
                }

                // Comfort quadratics on linearized RH and T_bz.
                let w = p.w_comfort * stride_w / (20.0 * 20.0);
                let resid = obs0.rh_pct + off_rh - p.rh_setpoint_pct;
                rank_one_quadratic(&mut h_u, &mut f_u, &row_rh, resid, w);
                let w = p.w_comfort * stride_w / (10.0 * 10.0);
                let resid = ci[idx::T_BZ] - p.t_comfort_c;
                rank_one_quadratic(&mut h_u, &mut f_u, &state_row(idx::T_BZ), resid, w);
            }
        }

        // Decoupling: fan-speed increases penalized when humidity already
        // exceeds the threshold (per move block).
        let mut fan_up_rows: Vec<(usize, DVector<f64>, f64)> = Vec::new();
        for b in 0..n_blocks {
            let step0 = b * p.block;
            let obs = model.observables(&rollout[step0], &ws[b], d_hat);
            let rh_excess = (obs.rh_pct / 100.0 - p.rh_thresh_pct / 100.0).max(0.0);
            if rh_excess <= 0.0 {
                continue;
            }
            let fan_col = b * m + 1;
            let mut row = DVector::zeros(nz_u);
            row[fan_col] = 1.0;
            let rhs = if b == 0 {
                u_prev.fan
            } else {
                row[(b - 1) * m + 1] = -1.0;
                0.0
            };
            fan_up_rows.push((slacks.len(), row.clone(), rhs));
            slacks.push(SlackSpec {
                quad_w: 1e-6,
                lin_w: p.w_decouple * rh_excess,
                row,
                rhs,
            });
        }
        let _ = fan_up_rows;

        // Assemble the full decision space: inputs then slack columns.
        let nz = nz_u + slacks.len();
        let mut h = DMatrix::zeros(nz, nz);
        h.view_mut((0, 0), (nz_u, nz_u)).copy_from(&h_u);
        let mut f = DVector::zeros(nz);
        f.rows_mut(0, nz_u).copy_from(&f_u);
        for i in 0..nz {
            h[(i, i)] += 1e-8;
        }
        let widen = |row: &DVector<f64>| -> DVector<f64> {
            let mut r = DVector::zeros(nz);
            r.rows_mut(0, nz_u).copy_from(row);
            r
        };
        let mut rows_a: Vec<DVector<f64>> =
            rows_a.iter().map(|r| widen(r)).collect();
        let mut rows_b = rows_b;
        for (si, spec) in slacks.iter().enumerate() {
            let col = nz_u + si;
            h[(col, col)] += 2.0 * spec.quad_w;
            f[col] += spec.lin_w;
            // row·z − s ≤ rhs, and s ≥ 0.
            let mut r = widen(&spec.row);
            r[col] = -1.0;
            rows_a.push(r);
            rows_b.push(spec.rhs);
            row_labels.push("slack_excess");
            let mut nn = DVector::zeros(nz);
            nn[col] = -1.0;
            rows_a.push(nn);
            rows_b.push(0.0);
            row_labels.push("slack_nonneg");
        }

        let n_rows = rows_a.len();
        let mut a_mat = DMatrix::zeros(n_rows, nz);
        let mut b_vec = DVector::zeros(n_rows);
        for (r, (row, rhs)) in rows_a.iter().zip(rows_b.iter()).enumerate() {
            a_mat.set_row(r, &row.transpose());
            b_vec[r] = *rhs;
        }

        let opts = QpOptions {
            max_sweeps: p.qp_max_iters,
            tol: 1e-9,
            deadline: Some(deadline),
        };
        let sol = solve_qp(&h, &f, &a_mat, &b_vec, &opts);
        if sol.status == QpStatus::Infeasible && std::env::var("SUITLOOP_QP_DEBUG").is_ok() {
            // Worst violated row at the returned point.
            let r = &a_mat * &sol.z - &b_vec;
            let mut worst = (0usize, f64::NEG_INFINITY);
            for (i, v) in r.iter().enumerate() {
                if *v > worst.1 {
                    worst = (i, *v);
                }
            }
            eprintln!(
                "mpc infeasible: worst row {} ({}) violation {:.3e}, sweeps {}, rows {}, nz {}",
                worst.0,
                row_labels.get(worst.0).unwrap_or(&"?"),
                worst.1,
                sol.sweeps,
                a_mat.nrows(),
                nz
            );
        }
        let status = match sol.status {
            QpStatus::Optimal | QpStatus::Suboptimal => MpcStatus::Optimal,
            QpStatus::DeadlineExceeded => MpcStatus::DeadlineExceeded,
            QpStatus::Infeasible => MpcStatus::Infeasible,
        };
        if status != MpcStatus::Optimal {
            return self.fail(x_hat, u_prev, status);
        }

        let mut blocks = Vec::with_capacity(n_blocks);
        for b in 0..n_blocks {
            blocks.push(
                ControlInput {
                    m_dot_o2: sol.z[b * m],
                    fan: sol.z[b * m + 1],
                    bypass: sol.z[b * m + 2],
                }
                .clamp_to(&p.u_min, &p.u_max),
            );
        }
        let z_u = sol.z.rows(0, nz_u).clone_owned();
        let predicted: Vec<DVector<f64>> = (0..=p.horizon)
            .map(|i| &pred.c[i] + &pred.g[i] * &z_u)
            .collect();
        self.warm = Some(blocks.clone());
        MpcSolve {
            u: blocks[0],
            status,
            predicted,
            qp_sweeps: sol.sweeps,
        }
    }

    fn fail(&mut self, x_hat: &PlantState, u_prev: &ControlInput, status: MpcStatus) -> MpcSolve {
        self.warm = None;
        MpcSolve {
            u: *u_prev,
            status,
            predicted: vec![x_hat.to_vector()],
            qp_sweeps: 0,
        }
    }
}

/// Add w·(rowᵀz + resid)² to the quadratic cost.
fn rank_one_quadratic(
    h: &mut DMatrix<f64>,
    f: &mut DVector<f64>,
    row: &DVector<f64>,
    resid: f64,
    w: f64,
) {
    let nz = row.len();
    for i in 0..nz {
        if row[i] == 0.0 {
            continue;
        }
        f[i] += 2.0 * w * resid * row[i];
        for j in 0..nz {
            if row[j] != 0.0 {
                h[(i, j)] += 2.0 * w * row[i] * row[j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scarcity_multiplier_closed_forms() {
        assert_eq!(scarcity_lambda(3.0, 3.0, 5.0, 2.0, 1e5), 5.0);
        assert_eq!(scarcity_lambda(1.5, 3.0, 5.0, 2.0, 1e5), 20.0);
        assert_eq!(scarcity_lambda(0.3, 3.0, 5.0, 2.0, 1e5), 500.0);
        // Depleted tank saturates at the ceiling.
        assert_eq!(scarcity_lambda(0.0, 3.0, 5.0, 2.0, 1e5), 1e5);
        assert_eq!(scarcity_lambda(-1.0, 3.0, 5.0, 2.0, 1e5), 1e5);
    }

    #[test]
    fn lambda_strictly_increasing_as_tank_falls() {
        let mut last = 0.0;
        for i in 1..=100 {
            let m = 3.0 * (101 - i) as f64 / 100.0;
            let l = scarcity_lambda(m, 3.0, 5.0, 2.0, 1e12);
            assert!(l > last);
            last = l;
        }
    }

    /// Closed-form finite-horizon LQR via backward Riccati recursion: the
    /// independent oracle for the condensed unconstrained QP.
    fn riccati_first_action(
        a: &DMatrix<f64>,
        b: &DMatrix<f64>,
        q: &DMatrix<f64>,
        r: &DMatrix<f64>,
        n: usize,
        x0: &DVector<f64>,
    ) -> DVector<f64> {
        let mut p = q.clone();
        let mut k_first = DMatrix::zeros(b.ncols(), a.nrows());
        for _i in (0..n).rev() {
            let btpb = b.transpose() * &p * b + r;
            let k = btpb
                .clone()
                .try_inverse()
                .unwrap()
                * b.transpose()
                * &p
                * a;
            p = q + a.transpose() * &p * (a - b * &k);
            p = (&p + &p.transpose()) * 0.5;
            k_first = k;
        }
        -(k_first * x0)
    }

    #[test]
    fn condensed_unconstrained_matches_riccati_on_synthetic_plant() {
        // 2-state, 1-input stable system with quadratic tracking to the
        // origin; block size 1 so the condensed QP and LQR share the same
        // decision space.
        let a = DMatrix::from_row_slice(2, 2, &[0.95, 0.10, -0.05, 0.90]);
        let b = DMatrix::from_row_slice(2, 1, &[0.05, 0.10]);
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.5]);
        let r = DMatrix::from_row_slice(1, 1, &[0.2]);
        let n = 12;
        let x0 = DVector::from_row_slice(&[1.0, -0.8]);

        let models: Vec<DiscreteModel> = (0..n)
            .map(|_| DiscreteModel {
                a_d: a.clone(),
                b_d: b.clone(),
                g_d: DVector::zeros(2),
            })
            .collect();
        let block_of_step: Vec<usize> = (0..n).collect();
        let pred = build_prediction(&models, &block_of_step, n, &x0, 1);

        // J = Σ_{i=1..N} x_iᵀQx_i + Σ_{i=0..N-1} u_iᵀRu_i.
        let nz = n;
        let mut h = DMatrix::zeros(nz, nz);
        let mut f = DVector::zeros(nz);
        for i in 0..n {
            h[(i, i)] += 2.0 * r[(0, 0)];
        }
        for i in 1..=n {
            let gi = &pred.g[i];
            let ci = &pred.c[i];
            h += 2.0 * gi.transpose() * &q * gi;
            f += 2.0 * gi.transpose() * &q * ci;
        }
        let sol = solve_qp(
            &h,
            &f,
            &DMatrix::zeros(0, nz),
            &DVector::zeros(0),
            &QpOptions::default(),
        );
        let u0_oracle = riccati_first_action(&a, &b, &q, &r, n, &x0);
        assert!(
            (sol.z[0] - u0_oracle[0]).abs() < 1e-6,
            "qp {} vs riccati {}",
            sol.z[0],
            u0_oracle[0]
        );
    }

    #[test]
    fn receding_horizon_consistency_on_linear_plant() {
        // Resolving from the state actually reached reproduces the tail of
        // the previous solution (no disturbance, no noise).
        let a = DMatrix::from_row_slice(2, 2, &[0.9, 0.05, 0.0, 0.85]);
        let b = DMatrix::from_row_slice(2, 1, &[0.1, 0.05]);
        let q = DMatrix::identity(2, 2);
        let r = DMatrix::from_row_slice(1, 1, &[0.5]);
        let n = 10;
        let x0 = DVector::from_row_slice(&[2.0, -1.0]);

        let solve_from = |x: &DVector<f64>, horizon: usize| -> DVector<f64> {
            let models: Vec<DiscreteModel> = (0..horizon)
                .map(|_| DiscreteModel {
                    a_d: a.clone(),
                    b_d: b.clone(),
                    g_d: DVector::zeros(2),
                })
                .collect();
            let block_of_step: Vec<usize> = (0..horizon).collect();
            let pred = build_prediction(&models, &block_of_step, horizon, x, 1);
            let mut h = DMatrix::zeros(horizon, horizon);
            let mut f = DVector::zeros(horizon);
            for i in 0..horizon {
                h[(i, i)] += 2.0 * r[(0, 0)];
            }
            for i in 1..=horizon {
                h += 2.0 * pred.g[i].transpose() * &q * &pred.g[i];
                f += 2.0 * pred.g[i].transpose() * &q * &pred.c[i];
            }
            solve_qp(
                &h,
                &f,
                &DMatrix::zeros(0, horizon),
                &DVector::zeros(0),
                &QpOptions::default(),
            )
            .z
        };

        // Infinite-horizon-like behavior: with a long horizon, u_1 of the
        // first solve matches u_0 of the resolve from x_1.
        let long = 60;
        let z = solve_from(&x0, long);
        let x1 = &a * &x0 + &b * DVector::from_row_slice(&[z[0]]);
        let z2 = solve_from(&x1, long);
        assert!(
            (z[1] - z2[0]).abs() < 1e-6,
            "tail {} vs resolve {}",
            z[1],
            z2[0]
        );
        let _ = n;
    }
}
