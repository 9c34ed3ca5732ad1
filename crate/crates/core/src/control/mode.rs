//! Operating-mode hierarchy with consumable thresholds, danger zones,
//! recovery hysteresis, and the cascade triage ordering.

use crate::config::ModeParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    Normal,
    Conservation,
    Emergency,
    CascadeFailure,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Normal => "normal",
            Mode::Conservation => "conservation",
            Mode::Emergency => "emergency",
            Mode::CascadeFailure => "cascade",
        }
    }
}

/// Triage priorities in cascade-failure mode, highest first.
pub const CASCADE_TRIAGE: [&str; 4] = ["p_io2", "x_co2", "rh", "t_bed"];

#[derive(Debug, Clone, Copy, Default)]
pub struct ModeInputs {
    /// Remaining consumable fractions in [0, 1].
    pub tank_frac: f64,
    pub sorbent_frac: f64,
    pub desiccant_frac: f64,
    /// Danger-zone observables.
    pub p_io2_atm: f64,
    pub x_o2: f64,
    pub x_co2: f64,
    pub hr_bpm: f64,
    pub t_core_c: f64,
    pub t_bed_c: f64,
    /// Raised by median voting when two O2 cells disagree.
    pub sensor_fault: bool,
}

#[derive(Debug, Clone)]
pub struct ModeManager {
    mode: Mode,
    evacuation_latched: bool,
    clear_streak: u32,
}

/// Consecutive clear updates required before the mode steps back down.
const RECOVERY_DWELL: u32 = 30;

impl Default for ModeManager {
    fn default() -> Self {
        ModeManager {
            mode: Mode::Normal,
            evacuation_latched: false,
            clear_streak: 0,
        }
    }
}

impl ModeManager {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn evacuation_latched(&self) -> bool {
        self.evacuation_latched
    }

    /// Mode-dependent fire-safety O2 ceiling: relaxed to the toxicity
    /// backup bound only in latched cascade failure.
    pub fn x_o2_max(&self) -> f64 {
        if self.mode == Mode::CascadeFailure && self.evacuation_latched {
            0.50
        } else {
            0.235
        }
    }

    pub fn update(&mut self, p: &ModeParams, input: &ModeInputs) -> Mode {
        let consumables = [input.tank_frac, input.sorbent_frac, input.desiccant_frac];
        let critical = consumables.iter().filter(|f| **f < p.emergency_frac).count();
        let low = consumables
            .iter()
            .filter(|f| **f < p.conservation_frac)
            .count();
        let danger = input.hr_bpm > p.danger_hr_bpm
            || input.t_core_c > p.danger_t_core_c
            || input.x_o2 > p.danger_x_o2
            || input.x_co2 > p.danger_x_co2
            || input.p_io2_atm < p.danger_p_io2_atm
            || input.t_bed_c > p.danger_t_bed_c
            || input.sensor_fault;

        let target = if critical >= 2 {
            Mode::CascadeFailure
        } else if critical >= 1 || danger {
            Mode::Emergency
        } else if low >= 1 {
            Mode::Conservation
        } else {
            Mode::Normal
        };

        if target >= self.mode {
            self.mode = target;
            self.clear_streak = 0;
        } else {
            // Recovery only once every trigger clears by the hysteresis
            // margin and stays clear for the dwell period; danger-zone
            // triggers clear with the target itself.
            let h = p.hysteresis_frac;
            let clear_of = |threshold: f64| consumables.iter().all(|f| *f >= threshold + h);
            let can_drop_to = match self.mode {
                Mode::CascadeFailure | Mode::Emergency => {
                    !danger && clear_of(p.emergency_frac)
                }
                Mode::Conservation => clear_of(p.conservation_frac),
                Mode::Normal => true,
            };
            if can_drop_to {
                self.clear_streak += 1;
                if self.clear_streak >= RECOVERY_DWELL {
                    self.mode = target.max(match self.mode {
                        Mode::CascadeFailure => Mode::Emergency,
                        Mode::Emergency => Mode::Conservation,
                        _ => Mode::Normal,
                    });
                    self.clear_streak = 0;
                }
            } else {
                self.clear_streak = 0;
            }
        }

        if self.mode == Mode::CascadeFailure {
            self.evacuation_latched = true;
        }
        self.mode
    }
}
