//! Mission trace rows, CSV persistence with a versioned schema, and the
//! summary metrics derived from a trace.

use std::fmt::Write as _;
use suitloop_core::plant::{ControlInput, PlantState, STATE_NAMES};

pub const TRACE_SCHEMA: &str = "suitloop-trace v1";

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub t_s: f64,
    pub truth: PlantState,
    pub estimate: PlantState,
    pub u_applied: ControlInput,
    /// Candidate minus safe command (what the safety filter removed).
    pub cand_delta: [f64; 3],
    pub mode: String,
    /// Signed margins for the nine operating constraints (positive =
    /// satisfied).
    pub margins: [f64; 9],
    pub theta: f64,
    pub lambda: f64,
    pub vent_cum_mol: f64,
    pub p_io2_atm: f64,
    pub rh_pct: f64,
    pub x_co2: f64,
    pub p_s_pa: f64,
    pub solver: String,
    pub seal: String,
}

pub const MARGIN_NAMES: [&str; 9] = [
    "con1_tank_kg",
    "con2_caoh2_kg",
    "con3_water_margin_kg",
    "con4_pio2_band_atm",
    "con5_xo2_margin",
    "con6_xco2_margin",
    "con7_rh_margin_pct",
    "con8_vcl_margin_l",
    "con9_uptd_margin",
];

pub fn header() -> String {
    let mut cols: Vec<String> = vec!["t_s".into()];
    cols.extend(STATE_NAMES.iter().map(|n| n.to_string()));
    cols.extend(STATE_NAMES.iter().map(|n| format!("est_{n}")));
    cols.extend(
        [
            "u_inject_g_s",
            "u_fan_frac",
            "u_bypass_frac",
            "cand_d_inject_g_s",
            "cand_d_fan_frac",
            "cand_d_bypass_frac",
            "mode",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    cols.extend(MARGIN_NAMES.iter().map(|s| s.to_string()));
    cols.extend(
        [
            "theta",
            "lambda",
            "vent_cum_mol",
            "p_io2_atm",
            "rh_pct",
            "x_co2_frac",
            "p_s_pa",
            "solver",
            "seal",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    cols.join(",")
}

fn push_f64(line: &mut String, v: f64) {
    // Shortest round-trip formatting: parsing the written text recovers the
    // exact bits, which keeps summary reconstruction from a persisted trace
    // exact and traces byte-identical across runs.
    let _ = write!(line, ",{v}");
}

pub fn write_csv<W: std::io::Write>(rows: &[TraceRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "# {TRACE_SCHEMA}")?;
    writeln!(w, "{}", header())?;
    for r in rows {
        let mut line = String::with_capacity(1024);
        let _ = write!(line, "{}", r.t_s);
        for v in r.truth.to_array() {
            push_f64(&mut line, v);
        }
        for v in r.estimate.to_array() {
            push_f64(&mut line, v);
        }
        for v in [r.u_applied.m_dot_o2, r.u_applied.fan, r.u_applied.bypass] {
            push_f64(&mut line, v);
        }
        for v in r.cand_delta {
            push_f64(&mut line, v);
        }
        let _ = write!(line, ",{}", r.mode);
        for v in r.margins {
            push_f64(&mut line, v);
        }
        for v in [r.theta, r.lambda, r.vent_cum_mol, r.p_io2_atm, r.rh_pct, r.x_co2, r.p_s_pa] {
            push_f64(&mut line, v);
        }
        let _ = write!(line, ",{},{}", r.solver, r.seal);
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_csv(text: &str) -> Result<Vec<TraceRow>, String> {
    let mut rows = Vec::new();
    let mut lines = text.lines();
    let schema = lines.next().ok_or("empty trace file")?;
    if !schema.starts_with(&format!("# {TRACE_SCHEMA}")) {
        return Err(format!("unexpected trace schema line: {schema}"));
    }
    let head = lines.next().ok_or("missing header")?;
    if head != header() {
        return Err("trace header does not match schema v1".into());
    }
    for (ln, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let expect = 1 + 18 + 18 + 6 + 1 + 9 + 7 + 2;
        if parts.len() != expect {
            return Err(format!("row {}: {} fields, expected {expect}", ln + 3, parts.len()));
        }
        let f = |s: &str| -> Result<f64, String> {
            s.parse::<f64>().map_err(|e| format!("row {}: {e}", ln + 3))
        };
        let mut k = 0usize;
        let mut next = || {
            let v = parts[k];
            k += 1;
            v
        };
        let t_s = f(next())?;
        let mut truth_v = [0.0f64; 18];
        for v in truth_v.iter_mut() {
            *v = f(next())?;
        }
        let mut est_v = [0.0f64; 18];
        for v in est_v.iter_mut() {
            *v = f(next())?;
        }
        let u_applied = ControlInput {
            m_dot_o2: f(next())?,
            fan: f(next())?,
            bypass: f(next())?,
        };
        let cand_delta = [f(next())?, f(next())?, f(next())?];
        let mode = next().to_string();
        let mut margins = [0.0; 9];
        for m in margins.iter_mut() {
            *m = f(next())?;
        }
        let theta = f(next())?;
        let lambda = f(next())?;
        let vent_cum_mol = f(next())?;
        let p_io2_atm = f(next())?;
        let rh_pct = f(next())?;
        let x_co2 = f(next())?;
        let p_s_pa = f(next())?;
        let solver = next().to_string();
        let seal = next().to_string();
        rows.push(TraceRow {
            t_s,
            truth: PlantState::from_slice(&truth_v),
            estimate: PlantState::from_slice(&est_v),
            u_applied,
            cand_delta,
            mode,
            margins,
            theta,
            lambda,
            vent_cum_mol,
            p_io2_atm,
            rh_pct,
            x_co2,
            p_s_pa,
            solver,
            seal,
        });
    }
    Ok(rows)
}

/// Per-constraint violation tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ViolationStats {
    pub count: usize,
    pub max_depth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionSummary {
    pub scenario: String,
    pub controller: String,
    pub seed: u64,
    /// Minutes to the 10% emergency-floor crossing and to full depletion
    /// (None when the cap ended the mission first).
    pub t_emergency_min: Option<f64>,
    pub t_depletion_min: Option<f64>,
    pub duration_min: f64,
    pub peak_x_co2_pct: f64,
    pub peak_t_core_c: f64,
    pub vent_total_mol: f64,
    pub injected_total_kg: f64,
    pub violations: [ViolationStats; 9],
    /// Hard-constraint violations for the safety gate: x_O2 fire bound,
    /// wet-basis P_iO2 floor, counter-lung margin.
    pub hard_x_o2: ViolationStats,
    pub hard_p_io2: ViolationStats,
    pub hard_v_cl: ViolationStats,
    /// Compressed mode timeline: (mode, start minute).
    pub mode_timeline: Vec<(String, f64)>,
    pub fault: Option<String>,
}

/// Compute the summary from trace rows alone (plus mission identity); the
/// persisted trace carries everything needed to reproduce it exactly.
pub fn summarize(
    scenario: &str,
    controller: &str,
    seed: u64,
    rows: &[TraceRow],
    fault: Option<String>,
) -> MissionSummary {
    let m0 = rows.first().map(|r| r.truth.m_tank).unwrap_or(0.0);
    let mut t_emergency = None;
    let mut t_depletion = None;
    let mut peak_co2: f64 = 0.0;
    let mut peak_tc: f64 = f64::NEG_INFINITY;
    let mut violations = [ViolationStats::default(); 9];
    let mut hard_x_o2 = ViolationStats::default();
    let mut hard_p_io2 = ViolationStats::default();
    let mut hard_v_cl = ViolationStats::default();
    let mut timeline: Vec<(String, f64)> = Vec::new();

    for r in rows {
        if t_emergency.is_none() && r.truth.m_tank <= 0.10 * m0 {
            t_emergency = Some(r.t_s / 60.0);
        }
        if t_depletion.is_none() && r.truth.m_tank <= 1e-4 {
            t_depletion = Some(r.t_s / 60.0);
        }
        peak_co2 = peak_co2.max(r.x_co2 * 100.0);
        peak_tc = peak_tc.max(r.truth.t_core);
        for (i, m) in r.margins.iter().enumerate() {
            if *m < 0.0 {
                violations[i].count += 1;
                violations[i].max_depth = violations[i].max_depth.max(-m);
            }
        }
        let x_o2 = r.truth.x_o2;
        if r.mode != "cascade" && x_o2 > 0.235 {
            hard_x_o2.count += 1;
            hard_x_o2.max_depth = hard_x_o2.max_depth.max(x_o2 - 0.235);
        }
        if r.p_io2_atm < 0.16 {
            hard_p_io2.count += 1;
            hard_p_io2.max_depth = hard_p_io2.max_depth.max(0.16 - r.p_io2_atm);
        }
        if r.margins[7] < 0.0 {
            hard_v_cl.count += 1;
            hard_v_cl.max_depth = hard_v_cl.max_depth.max(-r.margins[7]);
        }
        if timeline.last().map(|(m, _)| m != &r.mode).unwrap_or(true) {
            timeline.push((r.mode.clone(), r.t_s / 60.0));
        }
    }

    MissionSummary {
        scenario: scenario.to_string(),
        controller: controller.to_string(),
        seed,
        t_emergency_min: t_emergency,
        t_depletion_min: t_depletion,
        duration_min: rows.last().map(|r| r.t_s / 60.0).unwrap_or(0.0),
        peak_x_co2_pct: peak_co2,
        peak_t_core_c: if peak_tc.is_finite() { peak_tc } else { 0.0 },
        vent_total_mol: rows.last().map(|r| r.vent_cum_mol).unwrap_or(0.0),
        injected_total_kg: m0 - rows.last().map(|r| r.truth.m_tank).unwrap_or(m0),
        violations,
        hard_x_o2,
        hard_p_io2,
        hard_v_cl,
        mode_timeline: timeline,
        fault,
    }
}

impl MissionSummary {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.controller,
            self.seed,
            self.duration_min,
            opt(self.t_emergency_min),
            opt(self.t_depletion_min),
            self.peak_x_co2_pct,
            self.peak_t_core_c,
            self.vent_total_mol,
            self.injected_total_kg,
            self.hard_x_o2.count,
            self.hard_p_io2.count,
            self.hard_v_cl.count,
            self.fault.clone().unwrap_or_default(),
        )
    }

    pub fn csv_header() -> &'static str {
        "scenario,controller,seed,duration_min,t_emergency_min,t_depletion_min,peak_x_co2_pct,\
         peak_t_core_c,vent_total_mol,injected_total_kg,hard_x_o2_violations,\
         hard_p_io2_violations,hard_v_cl_violations,fault"
    }

    pub fn human_readable(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mission: scenario {} / {} / seed {}", self.scenario, self.controller, self.seed);
        let _ = writeln!(s, "  duration: {:.1} min", self.duration_min);
        let _ = writeln!(
            s,
            "  O2 10% floor crossed: {}",
            self.t_emergency_min
                .map(|t| format!("{t:.1} min"))
                .unwrap_or_else(|| "not reached".into())
        );
        let _ = writeln!(
            s,
            "  O2 depleted: {}",
            self.t_depletion_min
                .map(|t| format!("{t:.1} min"))
                .unwrap_or_else(|| "not reached".into())
        );
        let _ = writeln!(s, "  peak x_CO2: {:.3} %", self.peak_x_co2_pct);
        let _ = writeln!(s, "  peak core temperature: {:.2} C", self.peak_t_core_c);
        let _ = writeln!(s, "  vented: {:.4} mol", self.vent_total_mol);
        let _ = writeln!(s, "  injected: {:.4} kg O2", self.injected_total_kg);
        let _ = writeln!(
            s,
            "  hard violations (x_O2 / P_iO2 / V_CL): {} / {} / {}",
            self.hard_x_o2.count, self.hard_p_io2.count, self.hard_v_cl.count
        );
        let modes: Vec<String> = self
            .mode_timeline
            .iter()
            .map(|(m, t)| format!("{m}@{t:.1}m"))
            .collect();
        let _ = writeln!(s, "  mode timeline: {}", modes.join(" -> "));
        if let Some(f) = &self.fault {
            let _ = writeln!(s, "  FAULT: {f}");
        }
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
