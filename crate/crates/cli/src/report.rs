//! Report records, batch summaries and tabular series files.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use oseen_core::fields::CUTOFF_PROFILE_ID;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub grid: Value,
    pub quadspec: Value,
    pub cutoff_profile: String,
    pub crate_version: String,
}

impl Provenance {
    pub fn new(config_hash: &str, seed: u64) -> Self {
        Self {
            config_hash: config_hash.to_string(),
            seed,
            grid: Value::Null,
            quadspec: Value::Null,
            cutoff_profile: CUTOFF_PROFILE_ID.to_string(),
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// One scenario's outcome. Non-finite numbers in `values` are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub scenario_id: String,
    pub kind: String,
    pub pass: bool,
    /// Set when the scenario aborted; `values` then holds what was measured before.
    pub error: Option<String>,
    pub values: Value,
    /// Companion files, relative to the record.
    pub files: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryLine {
    pub scenario_id: String,
    pub kind: String,
    pub pass: bool,
    pub record: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub config_hash: String,
    pub seed: u64,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub scenarios: Vec<SummaryLine>,
}

impl BatchSummary {
    pub fn from_records(config_hash: &str, seed: u64, records: &[ScenarioRecord]) -> Self {
        let passed = records.iter().filter(|r| r.pass).count();
        Self {
            config_hash: config_hash.to_string(),
            seed,
            total: records.len(),
            passed,
            failed: records.len() - passed,
            scenarios: records
                .iter()
                .map(|r| SummaryLine {
                    scenario_id: r.scenario_id.clone(),
                    kind: r.kind.clone(),
                    pass: r.pass,
                    record: record_file_name(&r.scenario_id),
                })
                .collect(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

pub const SUMMARY_FILE: &str = "summary.json";

pub fn record_file_name(id: &str) -> String {
    format!("{id}.json")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

pub fn write_record(dir: &Path, record: &ScenarioRecord) -> Result<PathBuf> {
    let path = dir.join(record_file_name(&record.scenario_id));
    write_json(&path, record)?;
    Ok(path)
}

pub fn write_summary(dir: &Path, summary: &BatchSummary) -> Result<PathBuf> {
    let path = dir.join(SUMMARY_FILE);
    write_json(&path, summary)?;
    Ok(path)
}

/// A record or a batch summary, as read back by `show`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ReportFile {
    Record(ScenarioRecord),
    Summary(BatchSummary),
}

pub fn read_report(path: &Path) -> Result<ReportFile> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Series of rows under a header.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Comma-separated, header first, 17 significant digits.
pub fn write_series(path: &Path, series: &Series) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&series.header)?;
    for row in &series.rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series(path: &Path) -> Result<Series> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number `{s}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Series { header, rows })
}

/// Human-readable rendering used by `show`.
pub fn render(report: &ReportFile) -> String {
    let verdict = |p: bool| if p { "PASS" } else { "FAIL" };
    let mut out = String::new();
    match report {
        ReportFile::Summary(s) => {
            out.push_str(&format!(
                "batch {} (seed {}): {}/{} passed\n",
                &s.config_hash[..12.min(s.config_hash.len())],
                s.seed,
                s.passed,
                s.total
            ));
            for l in &s.scenarios {
                out.push_str(&format!("  {} {:<16} {}\n", verdict(l.pass), l.kind, l.scenario_id));
            }
        }
        ReportFile::Record(r) => {
            out.push_str(&format!("{} {} [{}]\n", verdict(r.pass), r.scenario_id, r.kind));
            if let Some(e) = &r.error {
                out.push_str(&format!("  error: {e}\n"));
            }
            if let Value::Object(map) = &r.values {
                for (k, v) in map {
                    let text = match v {
                        Value::Object(_) | Value::Array(_) => {
                            let s = v.to_string();
                            if s.len() > 96 {
                                format!("{}...", &s[..96])
                            } else {
                                s
                            }
                        }
                        other => other.to_string(),
                    };
                    out.push_str(&format!("  {k}: {text}\n"));
                }
            }
            for f in &r.files {
                out.push_str(&format!("  file: {f}\n"));
            }
            out.push_str(&format!(
                "  config {} seed {} cutoff {}\n",
                &r.provenance.config_hash[..12.min(r.provenance.config_hash.len())],
                r.provenance.seed,
                r.provenance.cutoff_profile
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip_keeps_every_digit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut s = Series::new(&["t", "l2_v"]);
        s.push(vec![0.1, std::f64::consts::PI]);
        s.push(vec![1.0 / 3.0, 1e-300]);
        write_series(&path, &s).unwrap();
        let back = read_series(&path).unwrap();
        assert_eq!(back, s);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,l2_v\n"));
    }

    #[test]
    fn record_and_summary_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let rec = ScenarioRecord {
            scenario_id: "x".into(),
            kind: "constants".into(),
            pass: true,
            error: None,
            values: serde_json::json!({"eps_star": 4.95, "bad": f64::NAN}),
            files: vec![],
            provenance: Provenance::new("abc", 1),
        };
        let p = write_record(dir.path(), &rec).unwrap();
        match read_report(&p).unwrap() {
            ReportFile::Record(r) => {
                assert_eq!(r.values["eps_star"], 4.95);
                assert!(r.values["bad"].is_null());
            }
            other => panic!("{other:?}"),
        }
        let sum = BatchSummary::from_records("abc", 1, &[rec]);
        let p = write_summary(dir.path(), &sum).unwrap();
        assert_eq!(read_report(&p).unwrap(), ReportFile::Summary(sum));
    }
}
