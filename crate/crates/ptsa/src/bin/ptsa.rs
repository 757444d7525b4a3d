use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ptsa::harness::{
    dump_tree, run, speedup_study, summarize, verify_suite, RunConfig, SpeedupStudyConfig,
};

#[derive(Parser)]
#[command(name = "ptsa", about = "Abstraction-aware Monte Carlo tree search runner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a run config and emit its metrics files.
    Run {
        #[arg(long)]
        config: String,
    },
    /// Run the verification suite; exits nonzero on any violation.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Base path for `<out>.report.json`; stdout only when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Race abstractions against the no-abstraction baseline.
    Speedup {
        #[arg(long)]
        config: String,
    },
    /// Run one search and print the tree as diagnostic JSON.
    DumpTree {
        #[arg(long)]
        config: String,
        /// Number of simulations to run before dumping.
        #[arg(long)]
        sim: usize,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run { config } => {
            let config = load_run_config(&config)?;
            let output = run(&config).map_err(|e| e.to_string())?;
            for summary in summarize(&output.records) {
                println!(
                    "episode {} moves {} return {:.4} aggregation {:.2}% depth {:.3} expanded {}",
                    summary.episode,
                    summary.moves,
                    summary.episode_return,
                    summary.mean_aggregation_percentage,
                    summary.mean_search_depth,
                    summary.total_expanded_nodes,
                );
            }
            if let Some(base) = &config.output_path {
                println!("wrote {base}.jsonl, {base}.csv, {base}.report.json");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { seed, out } => {
            let report = verify_suite(seed).map_err(|e| e.to_string())?;
            for check in &report.checks {
                let status = if check.passed { "pass" } else { "FAIL" };
                println!("{status} {} ({})", check.name, check.detail);
            }
            if let Some(base) = out {
                let path = format!("{base}.report.json");
                fs::write(&path, report.to_json().map_err(|e| e.to_string())?)
                    .map_err(|e| format!("write {path}: {e}"))?;
                println!("wrote {path}");
            }
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Speedup { config } => {
            let text = fs::read_to_string(&config).map_err(|e| format!("read {config}: {e}"))?;
            let study: SpeedupStudyConfig =
                serde_json::from_str(&text).map_err(|e| format!("parse {config}: {e}"))?;
            let report = speedup_study(&study).map_err(|e| e.to_string())?;
            let rendered = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
            println!("{rendered}");
            if let Some(base) = &study.base.output_path {
                let path = format!("{base}.report.json");
                fs::write(&path, &rendered).map_err(|e| format!("write {path}: {e}"))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpTree { config, sim } => {
            let config = load_run_config(&config)?;
            let dump = dump_tree(&config, sim).map_err(|e| e.to_string())?;
            println!("{dump}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_run_config(path: &str) -> Result<RunConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("read {path}: {e}"))?;
    RunConfig::from_json(&text).map_err(|e| format!("parse {path}: {e}"))
}
