//! Scenario-driven closed-loop simulator for the evasive-steering pipeline.

pub mod config;
pub mod engine;
pub mod plot;
pub mod trace;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

pub use config::{ConfigError, ScenarioConfig};
pub use engine::{run_scenario, PlanSnapshot, RunOutput};
pub use trace::{Outcome, Summary};

/// Writes `trace.csv`, `paths.csv`, `summary.json` and, with `plot`, the
/// plot tables into `dir`.
pub fn write_outputs(dir: &Path, run: &RunOutput, plot: bool) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    trace::write_trace(&mut BufWriter::new(File::create(dir.join("trace.csv"))?), &run.rows, &run.target_ids)?;
    trace::write_plans(&mut BufWriter::new(File::create(dir.join("paths.csv"))?), &run.plans)?;
    let mut json = serde_json::to_string_pretty(&run.summary)?;
    json.push('\n');
    std::fs::write(dir.join("summary.json"), json)?;
    if plot {
        plot::emit_plot_data(&dir.join("plots"), run)?;
    }
    Ok(())
}
