//! Exit codes and environment handling, through the real binary.

use std::process::{Command, Output};

fn scenario(name: &str) -> String {
    format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn supconv(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_supconv"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_firm_is_an_input_error() {
    let o = supconv(&["eval", "--scenario", &scenario("fig3.json"), "--firm", "9", "--x", "0.5,0.5"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no such firm"));
}

#[test]
fn boundary_point_is_a_precondition_error() {
    let o = supconv(&["flat", "--scenario", &scenario("fig2.json"), "--x", "0,1"], &[]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("boundary point: supergradient not guaranteed"));
}

#[test]
fn capability_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let three = dir.path().join("three.json");
    std::fs::write(&three, r#"{"firms": [{"family": "linear", "v": [1, 2, 3]}]}"#).unwrap();
    let o = supconv(&["figure", "--scenario", three.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("figure emission is 2-input only"));

    let o = supconv(&["aggregate", "--scenario", &scenario("fig1.json"), "--x", "0.5,0.5", "--engine", "exact2d"], &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("firm 1 is not concave"));
}

#[test]
fn malformed_scenario_reports_the_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"firms\": [\n  {\"family\": \"leontief\", \"a\": [1, 2]},\n]}").unwrap();
    let o = supconv(&["certify", "--scenario", bad.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = supconv(&["eval", "--scenario", "/nonexistent/scenario.json", "--firm", "1", "--x", "1,1"], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = supconv(&["eval", "--scenario", &scenario("fig3.json"), "--firm", "1", "--x", "a,b"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn certify_bundled_figures_succeeds() {
    for f in ["fig1.json", "fig2.json", "fig3.json"] {
        let o = supconv(&["certify", "--scenario", &scenario(f)], &[]);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).contains("\"passed\": true"));
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["figure", "--scenario", &scenario("fig2.json"), "--resolution", "200"];
    let one = supconv(&args, &[("SUPCONV_THREADS", "1")]);
    let many = supconv(&args, &[("SUPCONV_THREADS", "4")]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let bad = supconv(&args, &[("SUPCONV_THREADS", "zero")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn figure_writes_csv_and_svg_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    let svg = dir.path().join("f.svg");
    let o = supconv(
        &["figure", "--scenario", &scenario("fig3.json"), "--resolution", "50", "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("t,F_1,F_2,F_3,F"));
    assert_eq!(text.lines().count(), 52);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline class=\"aggregate\""));
}
