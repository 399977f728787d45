//! End-to-end checks of the `trapvol` binary: exit codes, output files,
//! byte-level determinism of reports, and the output-directory override.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trapvol"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn run_small_config_passes_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        &format!(
            r#"{{"examples": ["zmc-plane"], "quadrature_order": 8, "lattice_per_axis": 6,
                "seeds": 2, "curve_seeds": 1, "output_dir": "{}"}}"#,
            out.display()
        ),
    );
    let status = bin().arg("run").arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("report.json").exists());
    assert!(out.join("summary.csv").exists());
    assert!(out.join("volcurve_zmc-plane_7.csv").exists());
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("example,check,value,tolerance,pass\n"));
    assert!(summary.contains("zmc-plane,theta-plus-max,0,0.000001,true"));
}

#[test]
fn reports_are_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        &format!(
            r#"{{"examples": ["horosphere"], "quadrature_order": 8, "lattice_per_axis": 6,
                "seeds": 3, "curve_seeds": 1, "output_dir": "{}"}}"#,
            out.display()
        ),
    );
    assert_eq!(bin().arg("run").arg(&cfg).status().unwrap().code(), Some(0));
    let report1 = std::fs::read(out.join("report.json")).unwrap();
    let summary1 = std::fs::read(out.join("summary.csv")).unwrap();
    let curve1 = std::fs::read(out.join("volcurve_horosphere_7.csv")).unwrap();
    assert_eq!(bin().arg("run").arg(&cfg).status().unwrap().code(), Some(0));
    assert_eq!(report1, std::fs::read(out.join("report.json")).unwrap());
    assert_eq!(summary1, std::fs::read(out.join("summary.csv")).unwrap());
    assert_eq!(curve1, std::fs::read(out.join("volcurve_horosphere_7.csv")).unwrap());
}

#[test]
fn unreachable_trapped_tolerance_exits_one() {
    // the measured θ⁺ noise floor on the light-cone cylinder sits a bit
    // above 1e-16, so this tolerance is below what floating point delivers
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        &format!(
            r#"{{"examples": ["lightcone-flat"], "quadrature_order": 8, "lattice_per_axis": 6,
                "seeds": 1, "curve_seeds": 0,
                "tolerances": {{"tol_mt": 1e-16}}, "output_dir": "{}"}}"#,
            out.display()
        ),
    );
    let output = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("theta-plus-max"), "stderr: {stderr}");
    // the report is still written, with the failing row marked
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("theta-plus-max") && summary.contains("false"));
}

#[test]
fn malformed_config_exits_two_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "bad.json",
        &format!(r#"{{"quadrature_order": "eight", "output_dir": "{}"}}"#, out.display()),
    );
    let output = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(!out.exists(), "no output files on config errors");

    let cfg2 = write_config(dir.path(), "unknown.json", r#"{"bogus_field": 1}"#);
    assert_eq!(bin().arg("run").arg(&cfg2).status().unwrap().code(), Some(2));

    // missing file is also a config error
    assert_eq!(
        bin().arg("run").arg(dir.path().join("nope.json")).status().unwrap().code(),
        Some(2)
    );
}

#[test]
fn env_var_overrides_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let configured = dir.path().join("configured");
    let overridden = dir.path().join("overridden");
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        &format!(
            r#"{{"examples": ["zmc-plane"], "quadrature_order": 8, "lattice_per_axis": 6,
                "seeds": 1, "curve_seeds": 0, "output_dir": "{}"}}"#,
            configured.display()
        ),
    );
    let status = bin()
        .arg("run")
        .arg(&cfg)
        .env("TRAPVOL_OUT_DIR", &overridden)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(overridden.join("report.json").exists());
    assert!(!configured.exists());
}

#[test]
fn list_and_describe_subcommands() {
    let output = bin().arg("list-examples").output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    for id in ["lightcone-flat", "horosphere", "ppwave-slice"] {
        assert!(stdout.contains(id));
    }

    let output = bin().args(["describe", "ppwave-slice"]).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("ppwave(-1)"));

    assert_eq!(bin().args(["describe", "nope"]).status().unwrap().code(), Some(2));
    assert_eq!(bin().arg("frobnicate").status().unwrap().code(), Some(2));
}
