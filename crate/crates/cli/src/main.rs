use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use oseen_core::estimates::compute_constants;
use oseen_lab::report::{read_report, render};
use oseen_lab::{load_config, output_dir, run_batch};

#[derive(Parser)]
#[command(name = "oseenlab", version, about = "Truncated Oseen vortex laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a batch config.
    Run {
        config: PathBuf,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a scenario record or a batch summary.
    Show { report: PathBuf },
    /// Print the numerical constants as JSON.
    Constants,
}

fn main() -> ExitCode {
    match try_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn try_main() -> anyhow::Result<bool> {
    match Cli::parse().command {
        Command::Run { config, out } => {
            let cfg = load_config(&config)?;
            let dir = output_dir(&cfg, out.as_deref());
            let summary = run_batch(&cfg, &dir).with_context(|| format!("writing to {}", dir.display()))?;
            for line in &summary.scenarios {
                println!(
                    "{} {} [{}]",
                    if line.pass { "PASS" } else { "FAIL" },
                    line.scenario_id,
                    line.kind
                );
            }
            println!(
                "{}/{} passed, reports in {}",
                summary.passed,
                summary.total,
                dir.display()
            );
            Ok(summary.all_passed())
        }
        Command::Show { report } => {
            let r = read_report(&report).with_context(|| format!("reading {}", report.display()))?;
            print!("{}", render(&r));
            Ok(true)
        }
        Command::Constants => {
            let table = compute_constants()?;
            println!("{}", serde_json::to_string_pretty(&table)?);
            Ok(true)
        }
    }
}
