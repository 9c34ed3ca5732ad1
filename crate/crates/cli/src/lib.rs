//! Harness library: scenario scripting, the mission loop, metrics,
//! persistence, and the desk-constant verification suite.

pub mod mission;
pub mod output;
pub mod scenario;
pub mod trace;
pub mod verify;

pub use mission::{run_mission, run_with_controller, MissionError, MissionOptions, MissionOutput};
pub use output::{emit_outputs, Comparison, ComparisonRow};
pub use scenario::{scenario_by_name, scenario_library, Profile, ScenarioScript};
pub use trace::{read_csv, summarize, write_csv, MissionSummary, TraceRow};
