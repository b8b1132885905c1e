use std::path::{Path, PathBuf};
use std::process::{Command, Output};

type OsArg = std::ffi::OsString;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn obskit<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_obskit")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn help_exits_zero() {
    let o = obskit(["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("observability"));
}

#[test]
fn unknown_subcommand_is_an_input_error() {
    let o = obskit(["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn missing_file_is_an_input_error() {
    let o = obskit(["observability", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn invalid_scenario_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"observer":{"coeffs":[[0,0]]},"targets":[],"time":{"start":0,"end":1,"points":11}}"#,
    )
    .unwrap();
    let o = obskit([OsArg::from("estimate"), path.into()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn simulate_writes_a_csv_history() {
    let o = obskit([OsArg::from("simulate"), scenario("two_targets.json").into()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,target_id,bearing_rad,doppler_hz"));
    assert_eq!(lines.count(), 2 * 301);
}

#[test]
fn grid_override_changes_row_count() {
    let o = obskit([
        OsArg::from("simulate"),
        scenario("single_static.json").into(),
        "--grid-points".into(),
        "11".into(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 12);
}

#[test]
fn collinear_scenario_is_reported_unobservable() {
    let o = obskit([OsArg::from("observability"), scenario("collinear_same_side.json").into()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["rank_decision"], "unobservable");
    assert!(stderr(&o).contains("verdict: unobservable"));
}

#[test]
fn estimate_recovers_a_unique_state() {
    let o = obskit([OsArg::from("estimate"), scenario("two_targets.json").into()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["uniqueness"], "unique");
    assert!(stderr(&o).contains("uniqueness: unique"));
}

#[test]
fn infeasible_doppler_request_is_an_analysis_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"base_target":0,"l_prime":1.0,"b_prime":-50000.0,"rotation":{"kind":"constant","value":0.2}}"#,
    )
    .unwrap();
    let o = obskit([
        OsArg::from("ambiguity"),
        "generate".into(),
        scenario("ambiguity_base.json").into(),
        "--regime".into(),
        "doppler".into(),
        "--spec".into(),
        spec.into(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_request_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"base_target":0,"alpha":{"kind":"constant","value":2.0},"beta":1}"#).unwrap();
    let o = obskit([
        OsArg::from("ambiguity"),
        "generate".into(),
        scenario("ambiguity_base.json").into(),
        "--regime".into(),
        "bearing".into(),
        "--spec".into(),
        spec.into(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn verify_pair_reports_bearing_ambiguity_for_collinear_targets() {
    let o = obskit([
        OsArg::from("ambiguity"),
        "verify".into(),
        scenario("collinear_same_side.json").into(),
        "--regime".into(),
        "bearing".into(),
        "--pair".into(),
        "0,1".into(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["certificate"]["bearing_ambiguous"], true);
}

#[test]
fn pair_index_out_of_range_is_an_input_error() {
    let o = obskit([
        OsArg::from("ambiguity"),
        "verify".into(),
        scenario("single_static.json").into(),
        "--pair".into(),
        "0,3".into(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn generated_bearing_counterpart_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let o = obskit([
        OsArg::from("ambiguity"),
        "generate".into(),
        scenario("ambiguity_base.json").into(),
        "--regime".into(),
        "bearing".into(),
        "--spec".into(),
        scenario("bearing_request.json").into(),
        "--certificate".into(),
        cert.clone().into(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("t,x,y\n"));
    let c: serde_json::Value = serde_json::from_slice(&std::fs::read(&cert).unwrap()).unwrap();
    assert_eq!(c["bearing_ambiguous"], true);
    assert_eq!(c["verdict"], "ambiguous");
}

#[test]
fn selftest_passes() {
    let o = obskit(["selftest", "--seed", "3", "--count", "40"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("result: PASS"));
}
