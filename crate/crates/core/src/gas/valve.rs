//! Proportional O2 valve: stiction dead-zone, and the PWM planner used to
//! reach time-averaged flows below the minimum stable opening.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValveModel {
    /// Breakaway command voltage [V].
    pub v_break: f64,
    /// Minimum open flow once the armature moves [g/s].
    pub m_dot_min: f64,
    /// Linear gain above breakaway [g s⁻¹ V⁻¹].
    pub k_v: f64,
    /// PWM pulse flow, safely above the stiction boundary [g/s].
    pub m_dot_pulse: f64,
    /// PWM period [s]; 2–5 s keeps each pulse a small bolus.
    pub t_pwm: f64,
    /// Hysteresis band on the continuous/PWM mode switch [g/s].
    pub hysteresis: f64,
    /// Full-scale flow [g/s].
    pub m_dot_max: f64,
}

impl Default for ValveModel {
    fn default() -> Self {
        ValveModel {
            v_break: 1.0,
            m_dot_min: 0.10,
            k_v: 0.10,
            m_dot_pulse: 0.25,
            t_pwm: 3.0,
            hysteresis: 0.02,
            m_dot_max: 1.0,
        }
    }
}

/// Valve flow [g/s] for a raw voltage command: zero below breakaway, then a
/// discontinuous jump to the minimum opening and a linear regime above.
pub fn valve_flow(command_v: f64, model: &ValveModel) -> f64 {
    if command_v < model.v_break {
        0.0
    } else {
        model.m_dot_min + model.k_v * (command_v - model.v_break)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowMode {
    Continuous,
    Pwm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwmPlan {
    pub mode: FlowMode,
    /// Duty cycle δ ∈ [0, 1]; meaningful in PWM mode.
    pub duty: f64,
    /// Achieved time-averaged flow [g/s].
    pub average_flow: f64,
    /// Set when the request exceeded the physical maximum and was clamped.
    pub clamped: bool,
}

/// Stateful continuous/PWM mode selection with a hysteresis band to avoid
/// mode-switching oscillation at the stiction boundary.
#[derive(Debug, Clone)]
pub struct PwmPlanner {
    mode: FlowMode,
}

impl Default for PwmPlanner {
    fn default() -> Self {
        PwmPlanner { mode: FlowMode::Pwm }
    }
}

impl PwmPlanner {
    pub fn plan(&mut self, desired_g_s: f64, model: &ValveModel) -> PwmPlan {
        let desired = desired_g_s.max(0.0);
        let clamped = desired > model.m_dot_max;
        let desired = desired.min(model.m_dot_max);

        self.mode = match self.mode {
            FlowMode::Pwm if desired >= model.m_dot_min + model.hysteresis => FlowMode::Continuous,
            FlowMode::Continuous if desired < model.m_dot_min => FlowMode::Pwm,
            m => m,
        };

        match self.mode {
            FlowMode::Continuous => PwmPlan {
                mode: FlowMode::Continuous,
                duty: 1.0,
                average_flow: desired,
                clamped,
            },
            FlowMode::Pwm => {
                let duty = (desired / model.m_dot_pulse).min(1.0);
                PwmPlan {
                    mode: FlowMode::Pwm,
                    duty,
                    average_flow: duty * model.m_dot_pulse,
                    clamped,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stiction_dead_zone_and_jump() {
        let m = ValveModel::default();
        assert_eq!(valve_flow(0.5 * m.v_break, &m), 0.0);
        // Discontinuous jump to the minimum opening at breakaway.
        assert_eq!(valve_flow(m.v_break, &m), m.m_dot_min);
        let f = valve_flow(m.v_break + 1.0, &m);
        assert!((f - (m.m_dot_min + m.k_v)).abs() < 1e-15);
    }

    #[test]
    fn pwm_plan_zero_and_averaging() {
        let m = ValveModel::default();
        let mut planner = PwmPlanner::default();
        let p = planner.plan(0.0, &m);
        assert_eq!(p.mode, FlowMode::Pwm);
        assert_eq!(p.duty, 0.0);

        // Time-averaged flow over one period equals δ·m_dot_pulse.
        let p = planner.plan(0.06, &m);
        assert_eq!(p.mode, FlowMode::Pwm);
        assert!((p.average_flow - p.duty * m.m_dot_pulse).abs() < 1e-9);
        assert!((p.average_flow - 0.06).abs() < 1e-12);
    }

    #[test]
    fn hysteresis_prevents_mode_chatter() {
        let m = ValveModel::default();
        let mut planner = PwmPlanner::default();
        // In the band [m_dot_min, m_dot_min + hysteresis) the mode holds.
        assert_eq!(planner.plan(m.m_dot_min + 0.01, &m).mode, FlowMode::Pwm);
        assert_eq!(
            planner.plan(m.m_dot_min + m.hysteresis, &m).mode,
            FlowMode::Continuous
        );
        // Stays continuous inside the band, drops out only below m_dot_min.
        assert_eq!(planner.plan(m.m_dot_min + 0.01, &m).mode, FlowMode::Continuous);
        assert_eq!(planner.plan(m.m_dot_min - 0.01, &m).mode, FlowMode::Pwm);
    }

    #[test]
    fn over_request_clamps_and_flags() {
        let m = ValveModel::default();
        let mut planner = PwmPlanner::default();
        let p = planner.plan(2.0 * m.m_dot_max, &m);
        assert!(p.clamped);
        assert!((p.average_flow - m.m_dot_max).abs() < 1e-12);
    }
}
