//! Output persistence: trace CSV, summary files, plot-data extracts, and
//! the paired-comparison aggregate table.

use crate::mission::MissionOutput;
use crate::trace::{write_csv, MissionSummary};
use std::fs;
use std::io::Write;
use std::path::Path;

fn io_ctx(path: &Path, e: std::io::Error) -> String {
    format!("{}: {e}", path.display())
}

/// Write trace, summary (CSV + human-readable), and plot-data files into
/// `dir`, named by scenario/controller/seed.
pub fn emit_outputs(out: &MissionOutput, dir: &Path) -> Result<Vec<String>, String> {
    fs::create_dir_all(dir).map_err(|e| io_ctx(dir, e))?;
    let s = &out.summary;
    let stem = format!("{}_{}_{}", s.scenario, s.controller, s.seed);
    let mut written = Vec::new();

    let trace_path = dir.join(format!("trace_{stem}.csv"));
    let file = fs::File::create(&trace_path).map_err(|e| io_ctx(&trace_path, e))?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv(&out.trace, &mut buf).map_err(|e| io_ctx(&trace_path, e))?;
    buf.flush().map_err(|e| io_ctx(&trace_path, e))?;
    written.push(trace_path.display().to_string());

    let summary_csv = dir.join(format!("summary_{stem}.csv"));
    let text = format!("{}\n{}\n", MissionSummary::csv_header(), s.to_csv_row());
    fs::write(&summary_csv, text).map_err(|e| io_ctx(&summary_csv, e))?;
    written.push(summary_csv.display().to_string());

    let summary_txt = dir.join(format!("summary_{stem}.txt"));
    fs::write(&summary_txt, s.human_readable()).map_err(|e| io_ctx(&summary_txt, e))?;
    written.push(summary_txt.display().to_string());

    // Plot data: time series for the headline quantities.
    let plot_path = dir.join(format!("plot_{stem}.csv"));
    let mut plot = String::from("t_min,tank_kg,x_o2,x_co2_pct,t_core_c\n");
    for r in &out.trace {
        plot.push_str(&format!(
            "{},{},{},{},{}\n",
            r.t_s / 60.0,
            r.truth.m_tank,
            r.truth.x_o2,
            r.x_co2 * 100.0,
            r.truth.t_core
        ));
    }
    fs::write(&plot_path, plot).map_err(|e| io_ctx(&plot_path, e))?;
    written.push(plot_path.display().to_string());

    Ok(written)
}

/// Side-by-side comparison of paired runs over a seed set.
pub struct Comparison {
    pub scenario: String,
    pub rows: Vec<ComparisonRow>,
}

pub struct ComparisonRow {
    pub seed: u64,
    pub mpc: MissionSummary,
    pub pid: MissionSummary,
}

impl ComparisonRow {
    /// Endurance metric: time to full depletion, falling back to the run
    /// duration when the cap ended the mission first.
    pub fn endurance_min(s: &MissionSummary) -> f64 {
        s.t_depletion_min.unwrap_or(s.duration_min)
    }

    pub fn improvement_pct(&self) -> f64 {
        let pid = Self::endurance_min(&self.pid);
        let mpc = Self::endurance_min(&self.mpc);
        (mpc - pid) / pid * 100.0
    }
}

impl Comparison {
    pub fn median_improvement_pct(&self) -> f64 {
        let mut v: Vec<f64> = self.rows.iter().map(|r| r.improvement_pct()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if v.is_empty() {
            return 0.0;
        }
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "scenario {} paired comparison ({} seeds)\n",
            self.scenario,
            self.rows.len()
        ));
        s.push_str(
            "seed  endurance_pid  endurance_mpc  improvement  peak_co2_pid  peak_co2_mpc  peak_tc_pid  peak_tc_mpc\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:>4}  {:>12.1}m  {:>12.1}m  {:>+10.1}%  {:>11.3}%  {:>11.3}%  {:>10.2}C  {:>10.2}C\n",
                r.seed,
                ComparisonRow::endurance_min(&r.pid),
                ComparisonRow::endurance_min(&r.mpc),
                r.improvement_pct(),
                r.pid.peak_x_co2_pct,
                r.mpc.peak_x_co2_pct,
                r.pid.peak_t_core_c,
                r.mpc.peak_t_core_c,
            ));
        }
        s.push_str(&format!(
            "median endurance improvement: {:+.1}%\n",
            self.median_improvement_pct()
        ));
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "scenario,seed,endurance_pid_min,endurance_mpc_min,improvement_pct,peak_co2_pid_pct,peak_co2_mpc_pct,peak_tc_pid_c,peak_tc_mpc_c\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                self.scenario,
                r.seed,
                ComparisonRow::endurance_min(&r.pid),
                ComparisonRow::endurance_min(&r.mpc),
                r.improvement_pct(),
                r.pid.peak_x_co2_pct,
                r.mpc.peak_x_co2_pct,
                r.pid.peak_t_core_c,
                r.mpc.peak_t_core_c,
            ));
        }
        s
    }
}
