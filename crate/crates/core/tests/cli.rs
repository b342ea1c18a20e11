use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use strobo::cli::Config;

fn strobo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strobo")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> Vec<u8> {
    let out = strobo(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL_SWEEP: [&str; 6] = ["--set", "sweep.d_points=8", "--set", "sweep.inv_a_points=8", "--set", "numerics.burn_in=200"];

#[test]
fn sweep_csv_is_byte_identical_across_runs_and_workers() {
    let mut base = vec!["sweep"];
    base.extend(SMALL_SWEEP);
    let one = run_ok(&[base.as_slice(), &["--workers", "1"]].concat());
    let again = run_ok(&[base.as_slice(), &["--workers", "1"]].concat());
    let many = run_ok(&[base.as_slice(), &["--workers", "4"]].concat());
    assert_eq!(one, again);
    assert_eq!(one, many);
    let text = String::from_utf8(one).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# strobo config_hash="));
    assert_eq!(lines.next().unwrap(), "d,invA,period,n,rho_num,rho_den,eta_num,eta_den,word,status");
    assert_eq!(lines.count(), 64);
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("farey.csv");
    let stdout = run_ok(&["farey"]);
    run_ok(&["farey", "--out", path.to_str().unwrap()]);
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.json", "{ \"forcing\": ");
    assert_eq!(strobo(&["map", "--config", &broken]).status.code(), Some(2));

    let unknown = write(dir.path(), "unknown.json", r#"{"forcing": {"B": 1.0}}"#);
    assert_eq!(strobo(&["map", "--config", &unknown]).status.code(), Some(2));

    assert_eq!(strobo(&["map", "--config", "/nonexistent/strobo.json"]).status.code(), Some(2));
    assert_eq!(strobo(&["map", "--set", "forcing.d=1.5"]).status.code(), Some(2));
    assert_eq!(strobo(&["map", "--set", "nokeyvalue"]).status.code(), Some(2));
    assert_eq!(strobo(&["bogus"]).status.code(), Some(2));
}

#[test]
fn failing_hypotheses_exit_2_with_a_message() {
    // repelling rest state at 0.5
    let out = strobo(&["map", "--set", "model.params=[1.0, -0.5]"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hypotheses"));

    let out = strobo(&["map", "--set", "model.params=[1.0, 0.5]"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no sign change"));
}

#[test]
fn zero_step_staircase_is_header_only() {
    let text = String::from_utf8(run_ok(&["staircase", "--set", "staircase.steps=0"])).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert!(lines[1].starts_with("lambda,d,invA,window,period"));
}

#[test]
fn json_metadata_echoes_a_config_that_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "orbit.json",
        r#"{"forcing": {"A": 0.8, "d": 0.5, "T": 1.9}, "orbit": {"x0": 0.25, "samples_per_period": 20}}"#,
    );
    let doc: Value = serde_json::from_slice(&run_ok(&["orbit", "--config", &cfg, "--format", "json"])).unwrap();
    let meta = &doc["metadata"];
    assert_eq!(meta["command"], "orbit");

    let echoed: Config = serde_json::from_value(meta["config"].clone()).unwrap();
    assert_eq!(echoed.orbit.x0, 0.25);
    assert_eq!(meta["config_hash"].as_str().unwrap(), echoed.hash());

    // feeding the echo back reproduces the hash
    let echo_path = write(dir.path(), "echo.json", &meta["config"].to_string());
    let again: Value = serde_json::from_slice(&run_ok(&["orbit", "--config", &echo_path, "--format", "json"])).unwrap();
    assert_eq!(again["metadata"]["config_hash"], meta["config_hash"]);
    assert_eq!(again["rows"], doc["rows"]);

    let summary = &doc["rows"][0];
    assert_eq!(summary["section"], "summary");
    assert_eq!(summary["period"], 2);
    assert_eq!(summary["word"], "LR");
    assert_eq!((summary["eta_num"].as_i64(), summary["eta_den"].as_i64()), (Some(1), Some(2)));
}

#[test]
fn csv_hash_matches_json_hash_and_overrides_change_it() {
    let csv = String::from_utf8(run_ok(&["farey"])).unwrap();
    let hash = csv.lines().next().unwrap().rsplit('=').next().unwrap().to_string();
    let doc: Value = serde_json::from_slice(&run_ok(&["farey", "--format", "json"])).unwrap();
    assert_eq!(doc["metadata"]["config_hash"].as_str().unwrap(), hash);

    let other = String::from_utf8(run_ok(&["farey", "--set", "farey.depth=2"])).unwrap();
    assert_ne!(other.lines().next().unwrap(), csv.lines().next().unwrap());
}

#[test]
fn curves_rows_follow_the_left_right_ordering() {
    let text = String::from_utf8(run_ok(&["curves", "--set", "curves.d_points=5"])).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    // continuity curves sit inside (AnR, AnL) and are left out of the chain
    let cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| *h != "d" && !h.starts_with("inv") && !h.ends_with('C'))
        .map(|(i, _)| i)
        .collect();
    assert_eq!(cols.len(), 7);
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let vals: Vec<f64> = cols.iter().filter_map(|&i| rec[i].parse().ok()).collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]), "{rec:?}");
        rows += 1;
    }
    assert_eq!(rows, 5);
}
