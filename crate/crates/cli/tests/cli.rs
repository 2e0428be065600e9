use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasirand")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json_lines(out: &Output) -> Vec<serde_json::Value> {
    stdout(out).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn norms_of_squares_mod_7() {
    let out = run(&["norms", "--group", "Z7", "--set", "qr"]);
    assert!(out.status.success());
    let row = &json_lines(&out)[0];
    assert_eq!(row["group"], "Z7");
    assert!((row["uk_norm"].as_f64().unwrap() - 0.316_194_834_200_091_9).abs() < 1e-12);
}

#[test]
fn exact_mode_prints_rationals() {
    let out = run(&["--exact", "norms", "--group", "Z7", "--set", "qr"]);
    assert!(out.status.success());
    assert_eq!(json_lines(&out)[0]["uk_power"], "24/2401");
}

#[test]
fn csv_output_has_header() {
    let out = run(&["--format", "csv", "disc", "--group", "Z2", "--set", "0", "--k", "2", "--d", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("group,set,k,d,engine,delta,disc"));
    assert_eq!(lines.next(), Some("Z2,0,2,1,exact,0.5,0.125"));
}

#[test]
fn systemcut_reports_sf() {
    let out = run(&["systemcut", "--k", "4", "--d", "1"]);
    assert!(out.status.success());
    let rows = json_lines(&out);
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r["sf"] == 8));
}

#[test]
fn homdensity_edge_is_density() {
    let out = run(&["--exact", "homdensity", "--template", "edge", "--group", "Z5", "--set", "qr", "--k", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("\"3/5\""), "{}", stdout(&out));
}

#[test]
fn suite_is_deterministic_and_passes() {
    let a = run(&["suite", "--suite", "general"]);
    let b = run(&["suite", "--suite", "general"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rows = json_lines(&a);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["passed"] == true && r.get("runtime_ms").is_none()));
}

#[test]
fn failing_checks_exit_1() {
    let dir = std::env::temp_dir().join(format!("quasirand-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("config.json");
    std::fs::write(&config, r#"{"inequality_slack": -10.0}"#).unwrap();
    let out = run(&["suite", "--suite", "general", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn invalid_input_exits_2() {
    assert_eq!(run(&["norms", "--group", "Z1"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
}

#[test]
fn budget_exceeded_exits_3() {
    let out = run(&["--budget-bits", "2", "disc", "--group", "Z7", "--k", "3", "--d", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}
