//! Batch CLI: run single missions, compare controllers over paired seeds,
//! verify the desk constants, and dump the annotated default config.
//!
//! Exit codes: 0 success, 1 mission fault, 2 config error, 3 verification
//! failure.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use suitloop_cli::{
    emit_outputs, run_mission, scenario_by_name, Comparison, ComparisonRow, MissionOptions,
    ScenarioScript,
};
use suitloop_core::config::Config;

#[derive(Parser)]
#[command(name = "suitloop", about = "Semi-closed breathing-loop simulator and control stack")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mission and write trace/summary/plot files.
    Run {
        /// Built-in scenario (A|B|C) or a path to a scenario JSON file.
        #[arg(long)]
        scenario: String,
        /// Controller strategy name (mpc|pid).
        #[arg(long)]
        controller: String,
        /// Config JSON; built-in defaults when omitted.
        #[arg(long)]
        config: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Bypass the CBF safety filter on the PID baseline.
        #[arg(long, default_value_t = false)]
        raw_pid: bool,
    },
    /// Paired MPC-vs-PID runs over a seed set, with an aggregate table.
    Compare {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long)]
        config: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = false)]
        raw_pid: bool,
    },
    /// Golden desk-constant suite.
    Verify,
    /// Print the annotated default configuration JSON.
    Config,
}

fn load_scenario(spec: &str) -> Result<ScenarioScript, String> {
    if let Some(s) = scenario_by_name(spec) {
        return Ok(s);
    }
    if std::path::Path::new(spec).exists() {
        return ScenarioScript::from_file(spec);
    }
    Err(format!(
        "unknown scenario '{spec}': expected A, B, C, or a path to a scenario JSON"
    ))
}

fn load_config(path: &Option<String>) -> Result<Config, String> {
    match path {
        None => Ok(Config::default()),
        Some(p) => Config::from_file(p).map_err(|e| e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            controller,
            config,
            seed,
            out,
            raw_pid,
        } => {
            let scenario = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let opts = MissionOptions { raw_pid };
            let result = match run_mission(&scenario, &controller, &cfg, seed, &opts) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            match emit_outputs(&result, &out) {
                Ok(files) => {
                    for f in files {
                        println!("wrote {f}");
                    }
                }
                Err(e) => {
                    eprintln!("output error: {e}");
                    return ExitCode::from(1);
                }
            }
            print!("{}", result.summary.human_readable());
            if result.summary.fault.is_some() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Command::Compare {
            scenario,
            seeds,
            config,
            out,
            raw_pid,
        } => {
            let script = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let opts = MissionOptions { raw_pid };
            // Paired runs on identical seeds; independent missions run on
            // their own threads.
            let mut rows = Vec::new();
            let mut any_fault = false;
            for seed in 0..seeds {
                let (mpc, pid) = std::thread::scope(|s| {
                    let cfg_ref = &cfg;
                    let script_ref = &script;
                    let opts_ref = &opts;
                    let mpc = s.spawn(move || {
                        run_mission(script_ref, "mpc", cfg_ref, seed, opts_ref)
                    });
                    let pid = s.spawn(move || {
                        run_mission(script_ref, "pid", cfg_ref, seed, opts_ref)
                    });
                    (mpc.join().unwrap(), pid.join().unwrap())
                });
                match (mpc, pid) {
                    (Ok(m), Ok(p)) => {
                        any_fault |= m.summary.fault.is_some() || p.summary.fault.is_some();
                        rows.push(ComparisonRow {
                            seed,
                            mpc: m.summary,
                            pid: p.summary,
                        });
                    }
                    (Err(e), _) | (_, Err(e)) => {
                        eprintln!("config error: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            let cmp = Comparison {
                scenario: script.name.clone(),
                rows,
            };
            print!("{}", cmp.table());
            if let Err(e) = std::fs::create_dir_all(&out) {
                eprintln!("output error: {}: {e}", out.display());
                return ExitCode::from(1);
            }
            let path = out.join(format!("compare_{}.csv", script.name));
            if let Err(e) = std::fs::write(&path, cmp.to_csv()) {
                eprintln!("output error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
            println!("wrote {}", path.display());
            if any_fault {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Command::Verify => {
            let ok = suitloop_cli::verify::run_verify(std::io::stdout()).unwrap_or(false);
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Command::Config => {
            let cfg = Config::annotated_default();
            println!("{}", serde_json::to_string_pretty(&cfg).unwrap());
            ExitCode::SUCCESS
        }
    }
}
