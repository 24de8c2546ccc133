use std::path::PathBuf;
use std::process::{Command, Output};

fn kikuchi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kikuchi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kikuchi-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn padded_fixture_is_not_refuted() {
    let o = kikuchi(&["refute-3xor", "--fixture", "hadamard-padded", "--k", "3", "--l", "2", "--partitions", "exhaustive"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // the fixture is satisfiable, so the normalized bound cannot drop below 1
    assert!(report["mean_bound"].as_f64().unwrap() >= 1.0);
    assert_eq!(report["mean_value"].as_f64(), Some(1.0));
    assert_eq!(report["sound"], true);
    assert!(report["toolkit_version"].is_string());
    assert_eq!(report["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn malformed_instance_exits_one_with_line() {
    let dir = scratch("malformed");
    let path = dir.join("bad.txt");
    std::fs::write(&path, "6 1 3\n0 1\n0 1 x\n").unwrap();
    let o = kikuchi(&["refute-3xor", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn infeasible_level_exits_two() {
    let o = kikuchi(&["refute-3xor", "--n", "12", "--k", "3", "--l", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("derived clause"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(kikuchi(&["refute-3xor", "--partitions", "sometimes"]).status.code(), Some(1));
    assert_eq!(kikuchi(&["nonsense"]).status.code(), Some(1));
    assert_eq!(kikuchi(&["--help"]).status.code(), Some(0));
}

#[test]
fn reports_are_reproducible_and_written() {
    let dir = scratch("reports");
    let out = dir.join("combine.json");
    let args = ["combine", "--n", "9", "--k", "2", "--d", "1", "--seed", "7", "--out", out.to_str().unwrap()];
    let a = kikuchi(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let first = std::fs::read(&out).unwrap();
    let b = kikuchi(&args);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(std::fs::read(&out).unwrap(), first);
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert!(csv.starts_with("command,"));
    assert_eq!(csv.lines().count(), 2);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn each_pipeline_runs() {
    for args in [
        &["refute-2xor", "--n", "9", "--k", "3", "--d", "1"][..],
        &["refute-even", "--n", "8", "--k", "2", "--q", "2", "--l", "1"][..],
        &["refute-3xor", "--n", "9", "--k", "2", "--spectral", "product", "--b", "sample:3"][..],
        &["combine", "--fixture", "hadamard-padded", "--k", "2", "--d", "2", "--format", "csv"][..],
    ] {
        let o = kikuchi(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn sweep_rows_follow_grid() {
    let o = kikuchi(&["sweep", "--n-values", "8,9", "--k-values", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("8,2,") && rows[2].starts_with("9,2,"));
}

#[test]
fn verify_reports_suites() {
    let o = kikuchi(&["verify", "--suite", "sandwich,decomposition", "--trials", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["suites"].as_array().unwrap().len(), 2);
    assert_eq!(kikuchi(&["verify", "--suite", "nope"]).status.code(), Some(1));
}

#[test]
fn config_file_sets_defaults() {
    let dir = scratch("config");
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "n = 9\nk = 2\nseed = 3\n[source]\nkind = \"random\"\n").unwrap();
    let o = kikuchi(&["refute-3xor", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["instance"]["n"], 9);
    assert_eq!(report["instance"]["k"], 2);
    std::fs::remove_dir_all(dir).unwrap();
}
