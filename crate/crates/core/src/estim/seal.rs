//! Seal-integrity detection: distinguishes a slow leak (gradual suit
//! gauge-pressure decline with stable composition) from a catastrophic
//! breach (rapid pressure equalization or a toxic-coincident O2 drop).

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SealStatus {
    Nominal,
    SlowLeak,
    Breach,
}

impl SealStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SealStatus::Nominal => "nominal",
            SealStatus::SlowLeak => "slow_leak",
            SealStatus::Breach => "breach",
        }
    }
}

const MIN_HISTORY_S: f64 = 30.0;
const SLOPE_WINDOW_S: f64 = 120.0;
/// Sustained decline faster than this flags a slow leak [Pa/s]
/// (−0.05 mbar/min).
const LEAK_SLOPE_PA_S: f64 = -5.0 / 60.0;
/// Breach: ΔP collapses below this fraction of its value 10 s ago.
const BREACH_FRACTION: f64 = 0.2;
const BREACH_WINDOW_S: f64 = 10.0;
const TOXIC_ALERT_PPM: f64 = 50.0;
/// Composition drift treated as "stable" for the slow-leak classifier
/// [O2 fraction per minute].
const STABLE_X_O2_PER_MIN: f64 = 0.004;

#[derive(Debug, Clone, Default)]
pub struct SealMonitor {
    history: VecDeque<(f64, f64, f64)>, // (t, dp, x_o2)
    breach_latched: bool,
}

impl SealMonitor {
    pub fn push(&mut self, t_s: f64, dp_pa: f64, x_o2: f64) {
        self.history.push_back((t_s, dp_pa, x_o2));
        while let Some(&(t0, _, _)) = self.history.front() {
            if t_s - t0 > SLOPE_WINDOW_S + 1.0 {
                self.history.pop_front();
            } else {
                break;
            }
        }
    }

    pub fn status(&mut self, toxic_ppm: f64) -> SealStatus {
        if self.breach_latched {
            return SealStatus::Breach;
        }
        let Some(&(t_last, dp_last, x_last)) = self.history.back() else {
            return SealStatus::Nominal;
        };
        let Some(&(t_first, _, _)) = self.history.front() else {
            return SealStatus::Nominal;
        };
        if t_last - t_first < MIN_HISTORY_S {
            return SealStatus::Nominal;
        }

        // Breach: rapid equalization within the last 10 s.
        let dp_ago = self
            .history
            .iter()
            .rev()
            .find(|(t, _, _)| t_last - t >= BREACH_WINDOW_S)
            .map(|(_, dp, _)| *dp);
        if let Some(dp0) = dp_ago {
            if dp0 > 50.0 && dp_last < BREACH_FRACTION * dp0 {
                self.breach_latched = true;
                return SealStatus::Breach;
            }
        }
        // Breach: external toxics coinciding with an O2 fraction drop.
        if toxic_ppm > TOXIC_ALERT_PPM {
            let x_ago = self
                .history
                .iter()
                .rev()
                .find(|(t, _, _)| t_last - t >= BREACH_WINDOW_S)
                .map(|(_, _, x)| *x);
            if let Some(x0) = x_ago {
                if x0 - x_last > 0.003 {
                    self.breach_latched = true;
                    return SealStatus::Breach;
                }
            }
        }

        // Slow leak: sustained ΔP decline with stable composition.
        let (dp_slope, x_slope) = self.slopes();
        if dp_slope < LEAK_SLOPE_PA_S && x_slope.abs() < STABLE_X_O2_PER_MIN / 60.0 {
            return SealStatus::SlowLeak;
        }
        SealStatus::Nominal
    }

    /// Least-squares slopes of ΔP [Pa/s] and x_O2 [1/s] over the window.
    fn slopes(&self) -> (f64, f64) {
        let n = self.history.len() as f64;
        if n < 2.0 {
            return (0.0, 0.0);
        }
        let t0 = self.history.front().unwrap().0;
        let (mut st, mut sdp, mut sx, mut stt, mut stdp, mut stx) =
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for &(t, dp, x) in &self.history {
            let tt = t - t0;
            st += tt;
            sdp += dp;
            sx += x;
            stt += tt * tt;
            stdp += tt * dp;
            stx += tt * x;
        }
        let denom = n * stt - st * st;
        if denom.abs() < 1e-12 {
            return (0.0, 0.0);
        }
        (
            (n * stdp - st * sdp) / denom,
            (n * stx - st * sx) / denom,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_pressure_is_nominal() {
        let mut m = SealMonitor::default();
        for k in 0..200 {
            m.push(k as f64, 300.0, 0.21);
        }
        assert_eq!(m.status(0.0), SealStatus::Nominal);
    }

    #[test]
    fn scripted_slow_drift_flags_within_three_minutes() {
        let mut m = SealMonitor::default();
        // −0.1 mbar/min = −10 Pa/min.
        let mut flagged_at = None;
        for k in 0..=180 {
            let t = k as f64;
            m.push(t, 300.0 - 10.0 * t / 60.0, 0.21);
            if m.status(0.0) == SealStatus::SlowLeak && flagged_at.is_none() {
                flagged_at = Some(t);
            }
        }
        let t = flagged_at.expect("slow leak not flagged");
        assert!(t <= 180.0, "flagged late: {t}");
    }

    #[test]
    fn collapse_in_five_seconds_is_a_breach() {
        let mut m = SealMonitor::default();
        for k in 0..60 {
            m.push(k as f64, 400.0, 0.21);
        }
        for k in 0..5 {
            let t = 60.0 + k as f64;
            m.push(t, 400.0 * (1.0 - 0.95 * (k as f64 + 1.0) / 5.0), 0.21);
        }
        assert_eq!(m.status(0.0), SealStatus::Breach);
        // The verdict latches.
        for k in 0..30 {
            m.push(70.0 + k as f64, 350.0, 0.21);
        }
        assert_eq!(m.status(0.0), SealStatus::Breach);
    }

    #[test]
    fn toxic_coincident_o2_drop_is_a_breach() {
        let mut m = SealMonitor::default();
        for k in 0..=60 {
            let t = k as f64;
            let x = if t > 40.0 { 0.21 - 0.010 * (t - 40.0) / 20.0 } else { 0.21 };
            m.push(t, 300.0, x);
        }
        assert_eq!(m.status(120.0), SealStatus::Breach);
    }

    #[test]
    fn needs_thirty_seconds_of_history() {
        let mut m = SealMonitor::default();
        for k in 0..20 {
            m.push(k as f64, 400.0 - 20.0 * k as f64, 0.21);
        }
        assert_eq!(m.status(0.0), SealStatus::Nominal);
    }
}
