use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(path: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(path)
        .display()
        .to_string()
}

fn nlswap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlswap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_hybrid_json_reports_exact_all_success_mass() {
    let out = nlswap(&["run", &data("scenarios/hybrid.json"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let first = &doc["branches"][0];
    assert_eq!(first["outcomes"], serde_json::json!([0, 0, 0]));
    assert_eq!(
        first["probability"]["exact"],
        serde_json::json!({"r": ["1", "27"], "s": ["0", "1"]})
    );
    assert_eq!(first["probability"]["decimal"], "0.037037037037");
    assert_eq!(doc["branches"].as_array().unwrap().len(), 8);
    assert!(doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == true));
}

#[test]
fn run_swap_two_table() {
    let out = nlswap(&["run", &data("scenarios/swap_two.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("probability 1/3"), "{text}");
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn coupler_invalid_scenarios_exit_three() {
    for name in ["correlated_sb.json", "outside_allowed.json"] {
        let out = nlswap(&["run", &data(&format!("scenarios/{name}"))]);
        assert_eq!(out.status.code(), Some(3), "{name}");
        assert!(
            stderr(&out).contains("coupler 0 failed on branch path"),
            "{}",
            stderr(&out)
        );
    }
}

#[test]
fn malformed_scenario_exits_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\n  \"name\": \"bad\",\n  \"boxes\": [,]\n}\n").unwrap();
    let out = nlswap(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("bad.json:3:"), "{err}");
    assert!(err.contains("\"boxes\": [,]"), "{err}");
}

#[test]
fn missing_file_exits_two() {
    let out = nlswap(&["eval", "/nonexistent/box.json", "gsi"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reproduce_single_check() {
    let out = nlswap(&["reproduce", "--filter", "gsi-bounds"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.ends_with("PASS")).count(), 1);
    assert!(text.contains("1/1 checks passed"));
}

#[test]
fn reproduce_json_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("checks.json");
    let out = nlswap(&[
        "reproduce",
        "--filter",
        "ch-chsh-bridge",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc[0]["slug"], "ch-chsh-bridge");
    assert_eq!(doc[0]["pass"], true);
}

#[test]
fn literal_claim_fails_with_exit_two() {
    let out = nlswap(&[
        "reproduce",
        "--literal-claims",
        "--filter",
        "anti-pr-input",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("FAIL"));
    let out = nlswap(&["reproduce", "--filter", "anti-pr-input"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn unknown_filter_exits_two() {
    let out = nlswap(&["reproduce", "--filter", "no-such-check"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_gsi_and_ch() {
    let out = nlswap(&["eval", &data("boxes/sb.json"), "gsi"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("GSI = 8 "), "{text}");
    assert!(text.contains("exceeds quantum bound (4√2)"), "{text}");

    let out = nlswap(&["eval", &data("boxes/pr.json"), "ch"]);
    assert!(
        stdout(&out).starts_with("CH = 3/2 (≈ 1.500000000000)"),
        "{}",
        stdout(&out)
    );

    let out = nlswap(&["eval", &data("boxes/mixed3.json"), "gsi"]);
    let text = stdout(&out);
    assert!(text.starts_with("GSI = 0 "), "{text}");
    assert!(text.contains("within local bound (4)"), "{text}");

    let out = nlswap(&["eval", &data("boxes/sb.json"), "ch"]);
    assert_eq!(out.status.code(), Some(2));
    let out = nlswap(&["eval", &data("boxes/sb.json"), "gsi", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_json_decimal_matches_exact() {
    let out = nlswap(&[
        "eval",
        &data("boxes/failure2.json"),
        "gsi",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        doc["value"],
        serde_json::json!({"r": ["-2", "1"], "s": ["0", "1"]})
    );
    assert_eq!(doc["decimal"], "-2.000000000000");
    assert_eq!(doc["exceeds_local"], false);
}

#[test]
fn show_boxes() {
    let out = nlswap(&["show", &data("boxes/pr.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.starts_with("2-party box, 16 entries, 8 nonzero"),
        "{text}"
    );
    assert_eq!(text.matches("1/2").count(), 8);

    let out = nlswap(&["show", &data("boxes/sb.json")]);
    let text = stdout(&out);
    assert!(
        text.starts_with("3-party box, 64 entries, 32 nonzero"),
        "{text}"
    );
    assert_eq!(text.matches("1/4").count(), 32);

    let out = nlswap(&["show", &data("boxes/signaling.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("signals"));
}

#[test]
fn run_output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let scenario = data("scenarios/tsirelson.json");
    let direct = nlswap(&["run", &scenario, "--format", "json"]);
    let out = nlswap(&[
        "run",
        &scenario,
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read(&path).unwrap(), direct.stdout);
}
