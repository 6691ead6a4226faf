//! Scenario runner for the truncated Oseen vortex laboratory.

pub mod config;
pub mod error;
pub mod fit;
pub mod report;
pub mod scenarios;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use oseen_core::solver::write_snapshot;
use rayon::prelude::*;

pub use config::BatchConfig;
pub use error::{Error, Result};
use report::{BatchSummary, Provenance, ScenarioRecord};
use scenarios::Outcome;

/// Output directory used when neither the command line nor the config names one.
pub const DEFAULT_OUTPUT_DIR: &str = "reports";

pub fn load_config(path: &Path) -> Result<BatchConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    BatchConfig::parse(&text)
}

/// Output directory: explicit choice, then the config's, then the default.
pub fn output_dir(cfg: &BatchConfig, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn write_outcome(dir: &Path, cfg: &BatchConfig, s: &config::Scenario, out: Outcome) -> Result<ScenarioRecord> {
    let mut files = Vec::new();
    for (name, series) in &out.series {
        let file = format!("{}.{name}.csv", s.id);
        report::write_series(&dir.join(&file), series)?;
        files.push(file);
    }
    if let Some(snap) = &out.snapshot {
        let file = format!("{}.snapshot.txt", s.id);
        let mut w = BufWriter::new(fs::File::create(dir.join(&file))?);
        write_snapshot(&mut w, snap)?;
        files.push(file);
    }
    let mut provenance = Provenance::new(&cfg.hash, s.seed);
    provenance.grid = out.grid;
    provenance.quadspec = out.quadspec;
    let record = ScenarioRecord {
        scenario_id: s.id.clone(),
        kind: s.kind.name().to_string(),
        pass: out.pass,
        error: out.error,
        values: out.values,
        files,
        provenance,
    };
    report::write_record(dir, &record)?;
    Ok(record)
}

/// Runs every scenario, in parallel, and writes one record per scenario plus
/// the batch summary. Results do not depend on the thread count.
pub fn run_batch(cfg: &BatchConfig, dir: &Path) -> Result<BatchSummary> {
    fs::create_dir_all(dir)?;
    let outcomes: Vec<Outcome> = cfg.scenarios.par_iter().map(scenarios::execute).collect();
    let records = cfg
        .scenarios
        .iter()
        .zip(outcomes)
        .map(|(s, out)| write_outcome(dir, cfg, s, out))
        .collect::<Result<Vec<_>>>()?;
    let summary = BatchSummary::from_records(&cfg.hash, cfg.seed, &records);
    report::write_summary(dir, &summary)?;
    Ok(summary)
}
