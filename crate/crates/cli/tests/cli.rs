//! End-to-end tests of the binary: exit codes, report formats, and the
//! determinism guarantee across worker counts.

use std::path::PathBuf;
use std::process::{Command, Output};

fn biharm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biharm"))
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("biharm-test-{name}-{}.json", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    biharm().args(args).output().expect("binary runs")
}

#[test]
fn auto_lambda_cylinder_passes() {
    let config = write_config(
        "auto",
        r#"{
            "ambient": {"c": 0, "m": 2},
            "surface": {"kind": "euclidean_cylinder", "k": 1, "a": 1.0},
            "lambda": "auto",
            "grid": {"resolution": [17, 17]},
            "checks": ["lambda_residual"]
        }"#,
    );
    let out = run(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"overall_pass\": true"));
    std::fs::remove_file(config).ok();
}

#[test]
fn wrong_lambda_cylinder_fails_with_the_expected_magnitude() {
    // at lambda = 0 the flat unit cylinder's normal residual is |H| |A|^2 = 1/2
    let config = write_config(
        "wrong-lambda",
        r#"{
            "ambient": {"c": 0, "m": 2},
            "surface": {"kind": "euclidean_cylinder", "k": 1, "a": 1.0},
            "lambda": 0.0,
            "grid": {"resolution": [17, 17]},
            "checks": ["lambda_residual"]
        }"#,
    );
    let out = run(&["check", "--config", config.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let normal_row = text
        .lines()
        .find(|l| l.starts_with("lambda_residual_normal"))
        .expect("normal row present");
    let max: f64 = normal_row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((max - 0.5).abs() < 1e-9, "normal residual {max}");
    std::fs::remove_file(config).ok();
}

#[test]
fn slice_runs_all_default_checks() {
    let config = write_config(
        "slice",
        r#"{
            "ambient": {"c": 1, "m": 2},
            "surface": {"kind": "slice"},
            "lambda": 0.25,
            "grid": {"resolution": [21, 21]}
        }"#,
    );
    let out = run(&["check", "--config", config.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("check,max_residual,tolerance,pass\n"));
    for name in [
        "lambda_residual_normal",
        "height_laplacian",
        "theta_laplacian",
        "vertical_decomposition",
        "scalar_curvature",
        "htheta_eigen",
        "height_bilaplacian",
        "codazzi",
    ] {
        assert!(text.contains(name), "missing row {name} in:\n{text}");
    }
    std::fs::remove_file(config).ok();
}

#[test]
fn config_errors_exit_2() {
    // unparseable file
    let config = write_config("broken", "{not json");
    let out = run(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(config).ok();

    // bad curvature, named field
    let config = write_config(
        "bad-c",
        r#"{"ambient": {"c": 2, "m": 3}, "surface": {"kind": "slice"}}"#,
    );
    let out = run(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ambient"));
    std::fs::remove_file(config).ok();

    // unknown check name
    let config = write_config(
        "bad-check",
        r#"{"ambient": {"c": 0, "m": 2}, "surface": {"kind": "slice"},
            "checks": ["nonsense"]}"#,
    );
    let out = run(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checks[0]"));
    std::fs::remove_file(config).ok();
}

#[test]
fn identical_seed_and_config_reports_are_byte_identical_across_jobs() {
    let config = write_config(
        "determinism",
        r#"{
            "ambient": {"c": -1, "m": 2},
            "surface": {"kind": "graph", "amplitude": 0.2},
            "grid": {"resolution": [33, 33]},
            "seed": 11
        }"#,
    );
    let strip_wall_time = |bytes: &[u8]| -> String {
        String::from_utf8(bytes.to_vec())
            .unwrap()
            .lines()
            .filter(|l| !l.contains("wall_time_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = run(&["check", "--config", config.to_str().unwrap(), "--jobs", "1"]);
    let b = run(&["check", "--config", config.to_str().unwrap(), "--jobs", "4"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(strip_wall_time(&a.stdout), strip_wall_time(&b.stdout));

    // a different seed changes the surface, so residuals move
    let c = run(&[
        "check",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "12",
    ]);
    assert_ne!(strip_wall_time(&a.stdout), strip_wall_time(&c.stdout));
    std::fs::remove_file(config).ok();
}

#[test]
fn list_checks_covers_every_documented_name() {
    let out = run(&["list-checks"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in biharm_core::residuals::CHECK_NAMES {
        assert!(text.lines().any(|l| l == name), "missing {name}");
    }
}

#[test]
fn catalog_lists_lambda_values() {
    let out = run(&["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("euclidean_cylinder,0,2,-1,"));
    assert!(text.contains("spherical_vertical_cylinder,1,3,0,"));
    let out = run(&["catalog", "--format", "json"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("\"lambda_star\""));
}

#[test]
fn rotation_trace_has_the_documented_schema() {
    let out = run(&[
        "rotation",
        "--c",
        "1",
        "--m",
        "3",
        "--initial-slope",
        "0.8",
        "--every",
        "50",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "s,h,h_prime,alpha,H,lambda1,lambda2,ode_5_2_residual"
    );
    // mean curvature column stays at zero along a minimal profile
    for line in lines {
        let h_col: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!(h_col.abs() < 1e-10, "H = {h_col}");
    }
}

#[test]
fn custom_expression_surface_runs() {
    let config = write_config(
        "expr",
        r#"{
            "ambient": {"c": 1, "m": 2},
            "surface": {"kind": "custom-graph-expression", "expression": "0.15*sin(1.2*x + 0.5*y)"},
            "grid": {"resolution": [41, 41]},
            "checks": ["height_laplacian", "codazzi"]
        }"#,
    );
    let out = run(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_file(config).ok();
}

#[test]
fn report_out_flag_writes_the_file() {
    let config = write_config(
        "outfile",
        r#"{
            "ambient": {"c": 0, "m": 2},
            "surface": {"kind": "slice"},
            "grid": {"resolution": [17, 17]},
            "checks": ["height_laplacian"]
        }"#,
    );
    let out_path = std::env::temp_dir().join(format!("biharm-report-{}.json", std::process::id()));
    let out = run(&[
        "check",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert!(written.contains("\"overall_pass\": true"));
    std::fs::remove_file(config).ok();
    std::fs::remove_file(out_path).ok();
}
