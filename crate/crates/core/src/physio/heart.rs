//! Heart-rate decomposition (work / heat strain / hypoxia), the first-order
//! HR lag, the parametric work estimator that inverts the decomposition,
//! and the Kalman-corrected core temperature model.

use super::metabolism::vo2_of_work;
use super::MetabolicParams;

/// Additive steady-state heart-rate components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrComponents {
    pub work: f64,
    pub heat: f64,
    pub hypoxic: f64,
}

impl HrComponents {
    pub fn total(&self) -> f64 {
        self.work + self.heat + self.hypoxic
    }
}

/// Steady-state HR decomposition. Only the work component carries
/// metabolic information; heat strain and hypoxic compensation are additive
/// confounders that the estimator subtracts.
pub fn hr_components(
    w_hat: f64,
    rh_percent: f64,
    t_core_c: f64,
    x_o2: f64,
    p: &MetabolicParams,
) -> HrComponents {
    let work = (p.hr_rest + p.hr_per_watt * w_hat).min(p.hr_max);
    let heat =
        p.hr_per_rh * (rh_percent - 50.0).max(0.0) + p.hr_per_core * (t_core_c - 37.5).max(0.0);
    // Smooth quadratic ramp below the activation pressure (O2-fraction
    // equivalent atm at 1 atm ambient); zero at or above it.
    let deficit = ((p.hypox_onset_atm - x_o2) / p.hypox_width_atm).max(0.0);
    let hypoxic = p.hr_hypox_gain * deficit * deficit;
    HrComponents { work, heat, hypoxic }
}

/// First-order heart-rate lag toward the decomposed steady state [bpm/s].
pub fn hr_rhs(
    hr: f64,
    w_hat: f64,
    rh_percent: f64,
    t_core_c: f64,
    x_o2: f64,
    p: &MetabolicParams,
) -> f64 {
    (hr_components(w_hat, rh_percent, t_core_c, x_o2, p).total() - hr) / p.tau_hr
}

/// Parametric work estimator: invert the HR decomposition by subtracting
/// the non-work components before mapping back through the work slope.
pub fn work_from_hr(
    hr: f64,
    rh_percent: f64,
    t_core_c: f64,
    x_o2: f64,
    p: &MetabolicParams,
) -> f64 {
    let c = hr_components(0.0, rh_percent, t_core_c, x_o2, p);
    ((hr - c.heat - c.hypoxic - p.hr_rest) / p.hr_per_watt).max(0.0)
}

/// Kalman-corrected core temperature rate [°C/s]: metabolic heat in,
/// respiratory and skin-path losses out, plus the torso-measurement
/// correction term.
pub fn core_temp_rhs(
    t_core_c: f64,
    w_hat: f64,
    t_torso_meas_c: f64,
    p: &MetabolicParams,
) -> f64 {
    let q_met = p.q_basal + p.heat_per_watt * w_hat;
    let q_resp = p.resp_loss_per_vo2 * vo2_of_work(w_hat, p.vo2_rest, p.gamma, p.beta);
    let u_skin = p.u_skin_base + p.u_skin_slope * (t_core_c - p.vasodilation_onset_c).max(0.0);
    let q_skin = u_skin * (t_core_c - t_torso_meas_c);
    let predicted_torso = t_core_c - p.core_torso_offset_c;
    let correction = p.k_tc * (t_torso_meas_c - predicted_torso);
    (q_met - q_resp - q_skin + correction) / p.c_core
}
