use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hermfair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermfair"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn allocate_two_users_follows_threshold() {
    let dir = TempDir::new().unwrap();
    // Thresholds at gamma = 0: A shows iff p >= 0.03/0.2 = 0.15, B iff p >= 0.05/0.2 = 0.25.
    let pop = write(
        dir.path(),
        "pop.csv",
        "group,p,rho\nA,0.2,0.5\nB,0.2,0.5\nA,0.1,0.9\nB,0.3,0.1\n",
    );
    let out = hermfair(&["allocate", "--population", &pop, "--gamma", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary = stdout_json(&out);
    assert_eq!(summary["status"], "optimal");
    let d: Vec<f64> = serde_json::from_value(summary["decisions"].clone()).unwrap();
    assert_eq!(d, vec![1.0, 0.0, 0.0, 1.0]);
}

#[test]
fn allocate_writes_csv_and_summary() {
    let dir = TempDir::new().unwrap();
    let pop = write(dir.path(), "pop.csv", "group,p,rho\nA,0.2,0.5\nB,0.4,0.5\nB,0.1,0.5\n");
    let out_dir = dir.path().join("out");
    let out = hermfair(&[
        "allocate",
        "--population",
        &pop,
        "--parity",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(out_dir.join("allocation.csv")).unwrap();
    assert!(csv.starts_with("group,p,rho,d\n"));
    assert_eq!(csv.lines().count(), 4);
    let summary: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert!(summary["gaps"]["parity"].as_f64().unwrap().abs() <= 1e-6 + 1e-8);
    assert_eq!(summary["constraints"][0], "parity");
}

#[test]
fn allocate_empty_file_is_input_error() {
    let dir = TempDir::new().unwrap();
    let pop = write(dir.path(), "empty.csv", "");
    let out = hermfair(&["allocate", "--population", &pop]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn allocate_header_only_is_input_error() {
    let dir = TempDir::new().unwrap();
    let pop = write(dir.path(), "header.csv", "group,p,rho\n");
    let out = hermfair(&["allocate", "--population", &pop]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn allocate_reports_line_of_bad_row() {
    let dir = TempDir::new().unwrap();
    let pop = write(dir.path(), "bad.csv", "group,p,rho\nA,0.2,0.5\nB,1.7,0.5\n");
    let out = hermfair(&["allocate", "--population", &pop]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn allocate_binary_exact_rejects_thirty_users() {
    let dir = TempDir::new().unwrap();
    let mut body = String::from("group,p,rho\n");
    for i in 0..30 {
        body.push_str(&format!("{},0.{},0.5\n", if i % 2 == 0 { "A" } else { "B" }, 10 + i));
    }
    let pop = write(dir.path(), "p30.csv", &body);
    let out = hermfair(&["allocate", "--population", &pop, "--mode", "binary-exact"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("enumeration cap"), "{}", stderr(&out));
}

#[test]
fn allocate_rejects_invalid_params() {
    let dir = TempDir::new().unwrap();
    let pop = write(dir.path(), "pop.csv", "group,p,rho\nA,0.2,0.5\nB,0.2,0.5\n");
    let out = hermfair(&["allocate", "--population", &pop, "--alpha", "-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    assert_eq!(hermfair(&["allocate"]).status.code(), Some(1));
    assert_eq!(hermfair(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(hermfair(&["--help"]).status.code(), Some(0));
    assert_eq!(hermfair(&["--version"]).status.code(), Some(0));
}

fn small_sweep(dir: &Path, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join(name);
    let mut args = vec![
        "sweep", "--reps", "3", "--na", "40", "--nb", "40", "--seed", "7", "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let run = hermfair(&args);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    out
}

#[test]
fn sweep_is_deterministic_across_runs_and_jobs() {
    let dir = TempDir::new().unwrap();
    let grid = ["--scenario", "A", "--uptake", "main", "--grid", "0.01:0.4:0.13"];
    let a = small_sweep(dir.path(), "a", &[&grid[..], &["--jobs", "1"]].concat());
    let b = small_sweep(dir.path(), "b", &[&grid[..], &["--jobs", "1"]].concat());
    let c = small_sweep(dir.path(), "c", &[&grid[..], &["--jobs", "3"]].concat());
    for file in ["records.csv", "aggregates.csv", "aggregates.json"] {
        let first = fs::read(a.join(file)).unwrap();
        assert_eq!(first, fs::read(b.join(file)).unwrap(), "{file} differs between runs");
        assert_eq!(first, fs::read(c.join(file)).unwrap(), "{file} differs across jobs");
    }
}

#[test]
fn sweep_writes_expected_files_and_metadata() {
    let dir = TempDir::new().unwrap();
    let out = small_sweep(dir.path(), "s", &["--scenario", "B", "--grid", "0.05,0.1"]);
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    assert!(records.starts_with(
        "scenario,rule,param_name,param_value,replication,objective,utility_pct,parity_gap,eo_gap,eho_gap,status,seed\n"
    ));
    // 2 grid values x 5 rules x 3 replications.
    assert_eq!(records.lines().count(), 1 + 30);
    let meta: Value = serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["grid"], serde_json::json!([0.05, 0.1]));
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert!(meta["rng_stream"].as_str().unwrap().contains("chacha"));
    assert!(meta["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(out.join("aggregates.csv").exists());
    assert!(out.join("spec.json").exists());
}

#[test]
fn sweep_spec_json_reruns_identically() {
    let dir = TempDir::new().unwrap();
    let first = small_sweep(dir.path(), "first", &["--scenario", "C", "--grid", "0.05,0.2"]);
    let spec = first.join("spec.json");
    let second = dir.path().join("second");
    let run = hermfair(&[
        "sweep", "--config", spec.to_str().unwrap(), "--seed", "7", "--out", second.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    assert_eq!(
        fs::read(first.join("records.csv")).unwrap(),
        fs::read(second.join("records.csv")).unwrap()
    );
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn sweep_scenario_d_varies_xi_only() {
    let dir = TempDir::new().unwrap();
    let out = small_sweep(dir.path(), "d", &["--scenario", "D", "--grid", "0.1,0.3"]);
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    assert!(column(&records, "param_name").iter().all(|n| n == "xi"));
    let mut values = column(&records, "param_value");
    values.dedup();
    assert_eq!(values, ["0.1", "0.3"]);
    let spec: Value = serde_json::from_str(&fs::read_to_string(out.join("spec.json")).unwrap()).unwrap();
    let fixed = &spec["fixed"];
    assert_eq!(fixed["alpha"], 0.2);
    assert_eq!(fixed["beta_a"], 0.03);
    assert_eq!(fixed["beta_b"], 0.05);
    assert_eq!(fixed["theta_a"], 0.05);
    assert_eq!(fixed["theta_b"], 0.1);
    assert_eq!(fixed["omega_a"], 0.01);
    assert_eq!(fixed["omega_b"], 0.01);
}

#[test]
fn sweep_gamma_scenario_varies_gamma() {
    let dir = TempDir::new().unwrap();
    let out = small_sweep(dir.path(), "g", &["--scenario", "gamma", "--grid", "0:1:0.5"]);
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    assert!(column(&records, "param_name").iter().all(|n| n == "gamma"));
    let mut values = column(&records, "param_value");
    values.dedup();
    assert_eq!(values, ["0", "0.5", "1"]);
}

#[test]
fn sweep_rejects_bad_overrides_before_running() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x");
    let o = out.to_str().unwrap();
    assert_eq!(hermfair(&["sweep", "--scenario", "A", "--reps", "0", "--out", o]).status.code(), Some(1));
    assert_eq!(hermfair(&["sweep", "--scenario", "A", "--grid", "1:0:0.1", "--out", o]).status.code(), Some(1));
    assert_eq!(hermfair(&["sweep", "--scenario", "Z", "--out", o]).status.code(), Some(1));
    assert_eq!(hermfair(&["sweep", "--out", o]).status.code(), Some(1));
    let cfg = write(dir.path(), "cfg.json", "{\"id\": \"A\", \"bogus\": 1}");
    assert_eq!(hermfair(&["sweep", "--config", &cfg, "--out", o]).status.code(), Some(1));
}

#[test]
fn stats_chi2_table4() {
    let dir = TempDir::new().unwrap();
    let table = write(dir.path(), "t4.csv", "group,shown,not_shown\nA,219,883\nB,122,1975\n");
    let out = hermfair(&["stats", "chi2", "--table", &table]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = &stdout_json(&out)["result"];
    assert!((r["statistic"].as_f64().unwrap() - 148.37).abs() < 0.01);
    assert!((r["cramers_v"].as_f64().unwrap() - 0.215).abs() < 0.001);
}

#[test]
fn stats_wilson_table4() {
    let out = hermfair(&["stats", "wilson", "--successes", "219", "--n", "1102"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &stdout_json(&out)["result"];
    assert_eq!(format!("{:.3}", r["lo"].as_f64().unwrap()), "0.176");
    assert_eq!(format!("{:.3}", r["hi"].as_f64().unwrap()), "0.223");
    let pretty = hermfair(&["stats", "wilson", "--successes", "219", "--n", "1102", "--pretty"]);
    assert!(String::from_utf8_lossy(&pretty.stdout).contains("[0.176, 0.223]"));
}

#[test]
fn stats_rejects_one_row_table() {
    let dir = TempDir::new().unwrap();
    let table = write(dir.path(), "t.csv", "g,shown,not\nA,219,883\n");
    assert_eq!(hermfair(&["stats", "chi2", "--table", &table]).status.code(), Some(1));
}

#[test]
fn stats_rejects_malformed_counts() {
    let dir = TempDir::new().unwrap();
    let table = write(dir.path(), "t.csv", "g,shown,not\nA,219,883\nB,x,1\n");
    let out = hermfair(&["stats", "chi2", "--table", &table]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stats_proportions_by_row() {
    let dir = TempDir::new().unwrap();
    let table = write(dir.path(), "t.csv", "g,shown,not\nA,219,883\nB,122,1975\n");
    let out = hermfair(&["stats", "proportions", "--table", &table]);
    assert_eq!(out.status.code(), Some(0));
    let cell = &stdout_json(&out)["cells"][0][0];
    assert_eq!(cell["n"], 1102);
}

#[test]
fn export_population_round_trips_into_allocate() {
    let dir = TempDir::new().unwrap();
    let pop = dir.path().join("pop.csv");
    let p = pop.to_str().unwrap();
    let out = hermfair(&["export-population", "--na", "20", "--nb", "25", "--seed", "3", "--out", p]);
    assert_eq!(out.status.code(), Some(0));
    let body = fs::read_to_string(&pop).unwrap();
    assert!(body.starts_with("group,p,rho\n"));
    assert_eq!(body.lines().count(), 46);
    let again = hermfair(&["export-population", "--na", "20", "--nb", "25", "--seed", "3"]);
    assert_eq!(again.stdout, body.as_bytes());
    let solved = hermfair(&["allocate", "--population", p, "--all"]);
    assert_eq!(solved.status.code(), Some(0), "{}", stderr(&solved));
}
