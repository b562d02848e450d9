use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::process::{Command, Output};

use bimeron::competitor::{build_competitor, CompetitorSpec};
use bimeron::field::{io, Director, Field, GridSpec};

fn bimeron(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bimeron")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_field(path: &Path, field: &Field<f64>) {
    io::write_binary(field, BufWriter::new(File::create(path).unwrap())).unwrap();
}

fn small_competitor() -> Field<f64> {
    let spec = CompetitorSpec::new(0.0, 0.5, 4.0).unwrap();
    build_competitor(&spec, GridSpec::new(6.0, 121).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&bimeron(&[])), 2);
    assert_eq!(code(&bimeron(&["competitor", "--alpha", "0", "--l", "10", "--sigma", "0.1"])), 2);
    let small = ["competitor", "--alpha", "0", "--rho", "1", "--l", "10", "--sigma", "0.1", "--half-width", "5"];
    assert_eq!(code(&bimeron(&small)), 2);
    assert_eq!(code(&bimeron(&["minimize", "--sigma", "0.1", "--set", "nonsense"])), 2);
    assert_eq!(code(&bimeron(&["minimize", "--sigma", "0.1", "--set", "descent.method=newton"])), 2);
    assert_eq!(code(&bimeron(&["minimize", "--sigma", "0.9"])), 2);
}

#[test]
fn competitor_reports_the_measurement() {
    let out = bimeron(&["competitor", "--alpha", "-0.0", "--rho", "0.15", "--l", "30", "--sigma", "0.2", "--spacing", "0.015"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["below_four_pi"], true);
    assert_eq!(json["measurement"]["energy"]["degree"], -1);
}

#[test]
fn sweep_with_no_couplings_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.conf");
    std::fs::write(&cfg, "sigmas =\n").unwrap();
    assert_eq!(code(&bimeron(&["sweep", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&bimeron(&["sweep", dir.path().join("missing.conf").to_str().unwrap()])), 1);
}

#[test]
fn degree_zero_start_fails_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.bmf");
    write_field(&path, &Field::constant(GridSpec::new(3.0, 31).unwrap(), Director::e2()));
    let p = path.to_str().unwrap();
    let out_dir = dir.path().join("out");
    let out = bimeron(&["minimize", "--sigma", "0.2", "--init", p, "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("degree"));
    assert_eq!(code(&bimeron(&["fit", p])), 1);
    assert_eq!(code(&bimeron(&["fit", dir.path().join("none.bmf").to_str().unwrap()])), 1);
}

#[test]
fn minimize_then_fit_a_field_file() {
    let dir = tempfile::tempdir().unwrap();
    let init = dir.path().join("init.bmf");
    write_field(&init, &small_competitor());
    let out_dir = dir.path().join("run");
    let out = bimeron(&[
        "minimize",
        "--sigma",
        "0.25",
        "--init",
        init.to_str().unwrap(),
        "--set",
        "descent.max_iters=5",
        "--output-dir",
        out_dir.to_str().unwrap(),
        "--csv",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["iterations"], 5);
    assert!(report["report"]["final"]["total"].as_f64().unwrap() < report["init"]["total"].as_f64().unwrap());
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 6);
    let csv = std::fs::read_to_string(out_dir.join("field.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y,mx,my,mz"));
    assert_eq!(csv.lines().count(), 1 + 121 * 121);

    let field = out_dir.join("field.bmf");
    let out = bimeron(&["fit", field.to_str().unwrap(), "--sigma", "0.25"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rho = json["fit"]["params"]["rho"].as_f64().unwrap();
    assert!(rho > 0.25 && rho < 1.0, "{rho}");
    assert!(json["fit"]["rho_times_log"].is_number());
}

#[test]
fn verify_exit_status_follows_the_checks() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("verify.json");
    let out = bimeron(&["verify", "--output", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(code(&bimeron(&["verify", "--tolerance-scale", "0"])), 1);
}
