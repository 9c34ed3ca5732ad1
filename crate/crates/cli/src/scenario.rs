//! Scenario scripts: piecewise disturbance profiles, activity levels, and
//! fault injections, deterministic given a seed.

use serde::{Deserialize, Serialize};
use suitloop_core::plant::O2CellFault;

/// A scalar profile over mission time.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    /// Step schedule: value of the last step whose start time has passed.
    Steps { steps: Vec<(f64, f64)> },
    /// Linear ramp between two anchors, clamped outside.
    Ramp { t0_s: f64, v0: f64, t1_s: f64, v1: f64 },
    /// Square wave: `hi` for `hi_s` seconds, then `lo` for `lo_s`.
    Alternating { hi: f64, hi_s: f64, lo: f64, lo_s: f64 },
}

impl Profile {
    pub fn at(&self, t_s: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Steps { steps } => {
                let mut v = steps.first().map(|s| s.1).unwrap_or(0.0);
                for (t0, val) in steps {
                    if t_s >= *t0 {
                        v = *val;
                    }
                }
                v
            }
            Profile::Ramp { t0_s, v0, t1_s, v1 } => {
                if t_s <= *t0_s {
                    *v0
                } else if t_s >= *t1_s {
                    *v1
                } else {
                    v0 + (v1 - v0) * (t_s - t0_s) / (t1_s - t0_s)
                }
            }
            Profile::Alternating { hi, hi_s, lo, lo_s } => {
                let period = hi_s + lo_s;
                let phase = t_s.rem_euclid(period);
                if phase < *hi_s {
                    *hi
                } else {
                    *lo
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LeakFault {
    pub onset_s: f64,
    /// Leak orifice area [m²].
    pub area_m2: f64,
    /// Ramp-in time to full area [s]; zero means instantaneous (breach).
    pub ramp_s: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FaultScript {
    pub o2_cell: Option<O2CellFault>,
    pub leak: Option<LeakFault>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub name: String,
    /// Mission duration cap [min].
    pub duration_cap_min: f64,
    pub work_w: Profile,
    pub t_ext_c: Profile,
    pub q_rad_kw_m2: Profile,
    pub toxic_ppm: Profile,
    pub p_a_pa: Profile,
    /// Movement activity level (scales the stochastic vent disturbance).
    pub activity: Profile,
    #[serde(default)]
    pub faults: FaultScript,
}

impl ScenarioScript {
    pub fn from_file(path: &str) -> Result<ScenarioScript, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("failed to read scenario {path}: {e}"))?;
        serde_json::from_str(&text).map_err(|e| format!("failed to parse scenario {path}: {e}"))
    }

    pub fn leak_area_at(&self, t_s: f64) -> f64 {
        match &self.faults.leak {
            Some(leak) if t_s >= leak.onset_s => {
                if leak.ramp_s <= 0.0 {
                    leak.area_m2
                } else {
                    leak.area_m2 * ((t_s - leak.onset_s) / leak.ramp_s).min(1.0)
                }
            }
            _ => 0.0,
        }
    }
}

/// The built-in scenario studies.
pub fn scenario_library() -> Vec<ScenarioScript> {
    vec![scenario_a(), scenario_b(), scenario_c()]
}

pub fn scenario_by_name(name: &str) -> Option<ScenarioScript> {
    match name.to_ascii_uppercase().as_str() {
        "A" => Some(scenario_a()),
        "B" => Some(scenario_b()),
        "C" => Some(scenario_c()),
        _ => None,
    }
}

/// Sustained moderate exertion at 250 W.
pub fn scenario_a() -> ScenarioScript {
    ScenarioScript {
        name: "A".into(),
        duration_cap_min: 240.0,
        work_w: Profile::Constant { value: 250.0 },
        t_ext_c: Profile::Constant { value: 30.0 },
        q_rad_kw_m2: Profile::Constant { value: 0.0 },
        toxic_ppm: Profile::Constant { value: 0.0 },
        p_a_pa: Profile::Constant { value: 101_325.0 },
        activity: Profile::Constant { value: 0.5 },
        faults: FaultScript::default(),
    }
}

/// Intermittent burst: alternating 5-minute heavy exertion (500 W) and
/// 3-minute rest (80 W).
pub fn scenario_b() -> ScenarioScript {
    ScenarioScript {
        name: "B".into(),
        duration_cap_min: 240.0,
        work_w: Profile::Alternating {
            hi: 500.0,
            hi_s: 300.0,
            lo: 80.0,
            lo_s: 180.0,
        },
        t_ext_c: Profile::Constant { value: 30.0 },
        q_rad_kw_m2: Profile::Constant { value: 0.0 },
        toxic_ppm: Profile::Constant { value: 0.0 },
        p_a_pa: Profile::Constant { value: 101_325.0 },
        activity: Profile::Alternating {
            hi: 1.0,
            hi_s: 300.0,
            lo: 0.3,
            lo_s: 180.0,
        },
        faults: FaultScript::default(),
    }
}

/// Escalating thermal threat: 250 W with ambient temperature ramping from
/// 60 °C to 300 °C over 90 minutes.
pub fn scenario_c() -> ScenarioScript {
    ScenarioScript {
        name: "C".into(),
        duration_cap_min: 240.0,
        work_w: Profile::Constant { value: 250.0 },
        t_ext_c: Profile::Ramp {
            t0_s: 0.0,
            v0: 60.0,
            t1_s: 5400.0,
            v1: 300.0,
        },
        q_rad_kw_m2: Profile::Constant { value: 0.0 },
        toxic_ppm: Profile::Constant { value: 0.0 },
        p_a_pa: Profile::Constant { value: 101_325.0 },
        activity: Profile::Constant { value: 0.5 },
        faults: FaultScript::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burst_schedule_matches_quoted_times() {
        let b = scenario_b();
        // t = 4 min: inside the first 5-minute burst.
        assert_eq!(b.work_w.at(240.0), 500.0);
        // t = 6 min: in the rest period.
        assert_eq!(b.work_w.at(360.0), 80.0);
        // Next cycle starts at 8 min.
        assert_eq!(b.work_w.at(481.0), 500.0);
    }

    #[test]
    fn thermal_ramp_interpolates() {
        let c = scenario_c();
        assert_eq!(c.t_ext_c.at(0.0), 60.0);
        // t = 45 min: midpoint of the ramp → 180 °C.
        assert!((c.t_ext_c.at(2700.0) - 180.0).abs() < 1e-9);
        assert_eq!(c.t_ext_c.at(6000.0), 300.0);
    }

    #[test]
    fn scenario_json_round_trip() {
        let b = scenario_b();
        let json = serde_json::to_string_pretty(&b).unwrap();
        let back: ScenarioScript = serde_json::from_str(&json).unwrap();
        assert_eq!(back.work_w.at(240.0), 500.0);
        assert_eq!(back.name, "B");
    }

    #[test]
    fn leak_ramps_in() {
        let mut s = scenario_a();
        s.faults.leak = Some(LeakFault {
            onset_s: 100.0,
            area_m2: 1e-6,
            ramp_s: 50.0,
        });
        assert_eq!(s.leak_area_at(50.0), 0.0);
        assert!((s.leak_area_at(125.0) - 0.5e-6).abs() < 1e-18);
        assert_eq!(s.leak_area_at(200.0), 1e-6);
    }
}
