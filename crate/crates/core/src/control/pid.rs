//! Fixed-setpoint PID baseline: three independent SISO loops with
//! measurement filtering and anti-windup clamping. Reads sensor frames
//! only; it has no access to estimates or consumable levels.

use crate::config::PidParams;
use crate::physio::pio2_wet;
use crate::plant::{median_vote, ControlInput, SensorFrame};

#[derive(Debug, Clone)]
struct PidLoop {
    kp: f64,
    ki: f64,
    kd: f64,
    out_min: f64,
    out_max: f64,
    integral: f64,
    prev_error: Option<f64>,
    filtered: Option<f64>,
    filter_alpha: f64,
}

impl PidLoop {
    fn new(kp: f64, ki: f64, kd: f64, out_min: f64, out_max: f64, filter_alpha: f64) -> Self {
        PidLoop {
            kp,
            ki,
            kd,
            out_min,
            out_max,
            integral: 0.0,
            prev_error: None,
            filtered: None,
            filter_alpha,
        }
    }

    fn step(&mut self, error_raw: f64, dt: f64) -> f64 {
        let error = match self.filtered {
            Some(prev) => {
                let e = prev + self.filter_alpha * (error_raw - prev);
                self.filtered = Some(e);
                e
            }
            None => {
                self.filtered = Some(error_raw);
                error_raw
            }
        };
        let derivative = match self.prev_error {
            Some(prev) => (error - prev) / dt,
            None => 0.0,
        };
        self.prev_error = Some(error);

        let unclamped = self.kp * error + self.ki * (self.integral + error * dt) + self.kd * derivative;
        // Conditional integration: freeze the integral when pushing further
        // into saturation.
        if (unclamped < self.out_max || error < 0.0) && (unclamped > self.out_min || error > 0.0) {
            self.integral += error * dt;
        }
        (self.kp * error + self.ki * self.integral + self.kd * derivative)
            .clamp(self.out_min, self.out_max)
    }

    fn reset(&mut self) {
        self.integral = 0.0;
        self.prev_error = None;
        self.filtered = None;
    }
}

/// The three-loop baseline: P_iO2 → injection, x_CO2 → fan, T_bed → bypass.
#[derive(Debug, Clone)]
pub struct PidBaseline {
    o2: PidLoop,
    co2: PidLoop,
    bed: PidLoop,
    o2_setpoint: f64,
    co2_setpoint: f64,
    bed_setpoint: f64,
    fan_bias: f64,
    fan_min: f64,
}

impl PidBaseline {
    pub fn new(p: &PidParams, u_min: &[f64; 3], u_max: &[f64; 3]) -> Self {
        PidBaseline {
            o2: PidLoop::new(p.o2_kp, p.o2_ki, p.o2_kd, u_min[0], u_max[0], 0.18),
            co2: PidLoop::new(p.co2_kp, p.co2_ki, p.co2_kd, -1.0, 1.0, 0.25),
            bed: PidLoop::new(p.bed_kp, p.bed_ki, p.bed_kd, u_min[2], u_max[2], 0.25),
            o2_setpoint: p.o2_setpoint_atm,
            co2_setpoint: p.co2_setpoint,
            bed_setpoint: p.bed_setpoint_c,
            fan_bias: p.fan_bias,
            fan_min: u_min[1],
        }
    }

    pub fn reset(&mut self) {
        self.o2.reset();
        self.co2.reset();
        self.bed.reset();
    }

    /// One control step from raw sensors.
    pub fn step(&mut self, frame: &SensorFrame, dt: f64) -> ControlInput {
        let vote = median_vote(frame.x_o2_cells);
        let p_s = frame.p_a_pa + frame.dp_suit_pa;
        let p_io2 = pio2_wet(p_s, frame.t_bz_c, frame.rh_pct, vote.value / 100.0);

        let inject = self.o2.step(self.o2_setpoint - p_io2, dt);
        let fan_trim = self.co2.step(frame.x_co2 - self.co2_setpoint, dt);
        let fan = (self.fan_bias + fan_trim).clamp(self.fan_min, 1.0);
        let bypass = self.bed.step(frame.t_bed_c - self.bed_setpoint, dt);

        ControlInput {
            m_dot_o2: inject,
            fan,
            bypass,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    fn frame_at(p_io2_target_x_o2: f64, x_co2: f64, t_bed: f64) -> SensorFrame {
        SensorFrame {
            t_s: 0.0,
            x_co2,
            x_o2_cells: [p_io2_target_x_o2 * 100.0; 3],
            rh_pct: 40.0,
            t_bz_c: 35.0,
            t_torso_c: 33.0,
            t_bed_c: t_bed,
            dp_suit_pa: 200.0,
            q_circ_l_min: 300.0,
            v_cl_l: 4.0,
            hr_bpm: 120.0,
            hrv_ms: 25.0,
            accel_torso_g: 0.3,
            accel_wrist_g: 0.3,
            q_rad_kw_m2: 0.0,
            t_ext_c: 30.0,
            toxic_ppm: 0.0,
            p_a_pa: 101_325.0,
        }
    }

    #[test]
    fn at_setpoints_zero_incremental_command() {
        let cfg = Config::default();
        let mut pid = PidBaseline::new(&cfg.pid, &cfg.mpc.u_min, &cfg.mpc.u_max);
        // Find the x_O2 whose wet-basis P_iO2 equals the setpoint.
        let mut x = 0.21;
        for _ in 0..60 {
            let f = frame_at(x, cfg.pid.co2_setpoint, cfg.pid.bed_setpoint_c);
            let vote = f.x_o2_cells[0] / 100.0;
            let p = pio2_wet(f.p_a_pa + f.dp_suit_pa, f.t_bz_c, f.rh_pct, vote);
            x += (cfg.pid.o2_setpoint_atm - p) * 0.9;
        }
        let f = frame_at(x, cfg.pid.co2_setpoint, cfg.pid.bed_setpoint_c);
        let u = pid.step(&f, 1.0);
        assert!(u.m_dot_o2.abs() < 1e-6, "inject {}", u.m_dot_o2);
        assert!((u.fan - cfg.pid.fan_bias).abs() < 1e-6);
        assert!(u.bypass.abs() < 1e-6);
    }

    #[test]
    fn co2_step_raises_fan_monotonically_to_saturation() {
        let cfg = Config::default();
        let mut pid = PidBaseline::new(&cfg.pid, &cfg.mpc.u_min, &cfg.mpc.u_max);
        let f = frame_at(0.207, 0.006, cfg.pid.bed_setpoint_c);
        let mut last = 0.0;
        let mut saturated = false;
        for _ in 0..300 {
            let u = pid.step(&f, 1.0);
            assert!(u.fan >= last - 1e-12, "fan must rise monotonically");
            last = u.fan;
            if (u.fan - 1.0).abs() < 1e-12 {
                saturated = true;
                break;
            }
        }
        assert!(saturated, "fan should saturate under a sustained CO2 step");
    }

    #[test]
    fn anti_windup_recovers_quickly() {
        let cfg = Config::default();
        let mut pid = PidBaseline::new(&cfg.pid, &cfg.mpc.u_min, &cfg.mpc.u_max);
        // Long saturation episode.
        let hot = frame_at(0.21, 0.009, 40.0);
        for _ in 0..600 {
            pid.step(&hot, 1.0);
        }
        // Error flips sign: output must leave saturation promptly.
        let cold = frame_at(0.21, 0.0001, 40.0);
        let mut left_saturation = false;
        for _ in 0..30 {
            let u = pid.step(&cold, 1.0);
            if u.fan < 0.99 {
                left_saturation = true;
                break;
            }
        }
        assert!(left_saturation, "integrator wind-up was not clamped");
    }
}
