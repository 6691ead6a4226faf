use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::Command;

use oseen_core::solver::read_snapshot;
use oseen_lab::config::BatchConfig;
use oseen_lab::report::{read_report, read_series, ReportFile, SUMMARY_FILE};
use oseen_lab::run_batch;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oseenlab"))
}

fn record(dir: &Path, id: &str) -> oseen_lab::report::ScenarioRecord {
    match read_report(&dir.join(format!("{id}.json"))).unwrap() {
        ReportFile::Record(r) => r,
        other => panic!("expected a record, got {other:?}"),
    }
}

const SHORT_RUN: &str = r#"
[[scenario]]
id = "short"
kind = "simulate"
[scenario.params]
alpha = 0.3
t_final = 2.0
outputs = 8
[scenario.params.grid]
n_r = 64
n_theta = 32
"#;

#[test]
fn empty_batch_writes_an_empty_summary_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "seed = 3\n").unwrap();
    let out = dir.path().join("out");
    let run = bin().arg("run").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(run.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&run.stdout).contains("0/0 passed"));
    match read_report(&out.join(SUMMARY_FILE)).unwrap() {
        ReportFile::Summary(s) => {
            assert_eq!((s.total, s.passed, s.failed, s.seed), (0, 0, 0, 3));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn constants_record_carries_the_table_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BatchConfig::parse("[[scenario]]\nid = \"c\"\nkind = \"constants\"\n").unwrap();
    let summary = run_batch(&cfg, dir.path()).unwrap();
    assert!(summary.all_passed());
    let r = record(dir.path(), "c");
    assert_eq!(r.kind, "constants");
    let table = &r.values["table"];
    assert!(table["eps_star"].as_f64().unwrap() >= 4.956);
    for key in ["a_inf", "c_star", "c0", "eps_star"] {
        assert!(table[key].is_f64(), "{key}");
        assert!(table["labels"][key].is_string(), "{key}");
    }
    assert_eq!(r.provenance.config_hash, cfg.hash);
    assert!(r.provenance.cutoff_profile.contains("exp(-1/s)"));
    assert!(!r.provenance.quadspec.is_null());
}

#[test]
fn four_sweeps_give_four_records_and_counts() {
    let text = r#"
[[scenario]]
id = "l21-a"
kind = "verify-lemma21"
[scenario.params]
times = [0.0, 1.0, 10.0]
rhos = [1.0, 2.0]
exponents = [2.0, inf]

[[scenario]]
id = "l21-b"
kind = "verify-lemma21"
seed = 5
[scenario.params]
times = [0.0, 3.0]
rhos = [2.0, 4.0]
exponents = [4.0]

[[scenario]]
id = "l22-a"
kind = "verify-lemma22"
[scenario.params]
times = [0.0, 1.0]
rhos = [1.0, 2.0]
test_fields = 2

[[scenario]]
id = "l51"
kind = "lemma51"
[scenario.params]
family_size = 2
n = 128
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = BatchConfig::parse(text).unwrap();
    let summary = run_batch(&cfg, dir.path()).unwrap();
    assert_eq!(summary.total, 4);
    assert_eq!(summary.passed + summary.failed, 4);
    for line in &summary.scenarios {
        let r = record(dir.path(), &line.scenario_id);
        assert_eq!(r.pass, line.pass);
        assert!(r.values["reports"].as_array().is_some_and(|a| !a.is_empty()));
        for report in r.values["reports"].as_array().unwrap() {
            assert!(report["estimate_id"].is_string());
            assert!(report["pass"].is_boolean());
        }
        assert!(dir
            .path()
            .join(&r.files.first().cloned().unwrap_or(format!("{}.json", r.scenario_id)))
            .exists());
    }
    assert_eq!(record(dir.path(), "l21-b").provenance.seed, 5);
    assert_eq!(record(dir.path(), "l22-a").provenance.seed, 20240917);
}

#[test]
fn simulate_writes_series_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BatchConfig::parse(SHORT_RUN).unwrap();
    run_batch(&cfg, dir.path()).unwrap();
    let r = record(dir.path(), "short");
    assert!(r.error.is_none(), "{:?}", r.error);
    let series = read_series(&dir.path().join("short.series.csv")).unwrap();
    assert_eq!(&series.header[..3], ["t", "l2_v", "h1_v"]);
    assert_eq!(series.rows.len(), 9);
    let text = fs::read_to_string(dir.path().join("short.series.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().split(',').all(|v| v.contains('e')));
    let snap = read_snapshot(BufReader::new(
        fs::File::open(dir.path().join("short.snapshot.txt")).unwrap(),
    ))
    .unwrap();
    assert_eq!((snap.spec.n_r, snap.spec.n_theta), (64, 32));
    assert_eq!(snap.values.len(), 64 * 32);
    assert_eq!(r.provenance.grid["mesh"]["n_r"], 64);
}

#[test]
fn rerun_is_bit_for_bit_identical() {
    let text = format!(
        "seed = 11\n{SHORT_RUN}\n[[scenario]]\nid = \"fam\"\nkind = \"lemma51\"\n[scenario.params]\nfamily_size = 3\nn = 128\n"
    );
    let cfg = BatchConfig::parse(&text).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_batch(&cfg, a.path()).unwrap();
    run_batch(&cfg, b.path()).unwrap();
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 5);
    for n in names {
        let x = fs::read(a.path().join(&n)).unwrap();
        let y = fs::read(b.path().join(&n)).unwrap();
        assert!(x == y, "{n:?} differs between runs");
    }
}

#[test]
fn malformed_config_names_the_line() {
    let text = "[[scenario]]\nid = \"a\"\nkind = \"constants\"\n\n[[scenario]]\nid = \"a\"\nkind = \"constants\"\n";
    let err = BatchConfig::parse(text).unwrap_err().to_string();
    assert!(err.contains("line 6"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "[[scenario]]\nid = \"x\"\nkind = \"simulate\"\n[scenario.params]\nalpha = \"one\"\n",
    )
    .unwrap();
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("alpha") || msg.contains("line"), "{msg}");
}

#[test]
fn failing_scenario_sets_a_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fail.toml");
    let text = SHORT_RUN.replace("alpha = 0.3", "alpha = 0.0\nenergy_tolerance = 0.0");
    fs::write(&cfg, format!("[[scenario]]\nid = \"ok\"\nkind = \"constants\"\n{text}")).unwrap();
    let out_dir = dir.path().join("out");
    let out = bin().arg("run").arg(&cfg).arg("--out").arg(&out_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let shown = bin().arg("show").arg(out_dir.join(SUMMARY_FILE)).output().unwrap();
    let text = String::from_utf8_lossy(&shown.stdout);
    assert!(text.contains("1/2 passed"), "{text}");
    assert!(text.contains("FAIL simulate"), "{text}");
}

#[test]
fn constants_subcommand_prints_json() {
    let out = bin().arg("constants").output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["eps_star"].as_f64().unwrap() >= 4.956);
}
