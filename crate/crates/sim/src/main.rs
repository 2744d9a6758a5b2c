use std::path::PathBuf;
use std::process::ExitCode;

use aes_sim::config::{parse_value, set_parameter};
use aes_sim::{run_scenario, write_outputs, ScenarioConfig};
use anyhow::Context;
use clap::{Parser, Subcommand};

/// Exit code for unreadable or invalid input.
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "aes-sim", version, about = "Closed-loop evasive-steering scenario simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario; exits 0 (avoided / no trigger), 1 (collision) or 2 (aborted).
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write plot tables under OUT/plots.
        #[arg(long)]
        plot: bool,
    },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
    /// Run a scenario once per value of a dotted parameter, e.g. `trigger.tte_reduction`.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, num_args = 1.., required = true)]
        values: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Run { scenario, out, seed, plot } => {
            let mut cfg = ScenarioConfig::load(&scenario)?;
            if let Some(seed) = seed {
                cfg.sim.seed = seed;
            }
            let result = run_scenario(&cfg)?;
            write_outputs(&out, &result, plot).with_context(|| format!("writing {}", out.display()))?;
            let s = &result.summary;
            println!(
                "{}: {} at t={:.3}s{}",
                s.scenario,
                serde_json::to_value(s.outcome)?.as_str().unwrap_or_default(),
                s.end_time,
                s.reason.as_deref().map(|r| format!(" ({r})")).unwrap_or_default()
            );
            Ok(s.outcome.exit_code() as u8)
        }
        Command::Validate { scenario } => {
            let cfg = ScenarioConfig::load(&scenario)?;
            println!("{}: ok", if cfg.name.is_empty() { scenario.display().to_string() } else { cfg.name });
            Ok(0)
        }
        Command::Sweep { scenario, param, values, out } => {
            let text = std::fs::read_to_string(&scenario).with_context(|| format!("reading {}", scenario.display()))?;
            let base: toml::Value = text.parse()?;
            println!("{param},outcome,engage_time,engage_ttc,min_clearance,max_abs_lateral_error");
            for v in &values {
                let mut doc = base.clone();
                set_parameter(&mut doc, &param, parse_value(v))?;
                let cfg = ScenarioConfig::from_value(doc)?;
                let result = run_scenario(&cfg)?;
                if let Some(dir) = &out {
                    write_outputs(&dir.join(format!("{param}={v}")), &result, false)?;
                }
                let s = &result.summary;
                let f = |x: Option<f64>| x.map(|x| format!("{x:.4}")).unwrap_or_default();
                println!(
                    "{v},{},{},{},{},{}",
                    serde_json::to_value(s.outcome)?.as_str().unwrap_or_default(),
                    f(s.engage_time),
                    f(s.engage_ttc),
                    f(s.min_clearance),
                    f(s.max_abs_lateral_error)
                );
            }
            Ok(0)
        }
    }
}
