use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn curvop(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvop")).current_dir(dir).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn geometry_writes_one_csv_per_quantity() {
    let tmp = TempDir::new().unwrap();
    let o = curvop(tmp.path(), &["geometry", "--surface", "cone", "--grid", "8x6", "--out", "g"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let listed: Vec<&str> = std::str::from_utf8(&o.stdout).unwrap().lines().collect();
    assert_eq!(listed.len(), 7);
    for name in [
        "mean_curvature",
        "gaussian_curvature",
        "geometric_potential",
        "rescaled_factor",
        "metric",
        "inverse_metric",
        "normal_derivative_inverse_metric",
    ] {
        let text = std::fs::read_to_string(tmp.path().join("g").join(format!("{name}.csv"))).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("u,v,"), "{name}: {header}");
        assert_eq!(lines.count(), 48, "{name}");
    }
}

#[test]
fn geometry_json_document() {
    let tmp = TempDir::new().unwrap();
    let o = curvop(tmp.path(), &["geometry", "--surface", "sphere", "--grid", "4x4", "--format", "json", "--out", "."]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("geometry.json")).unwrap()).unwrap();
    assert_eq!(doc["surface"], "sphere");
    assert_eq!(doc["fields"].as_array().unwrap().len(), 7);
    assert!(doc["parameters"].as_array().unwrap().iter().any(|p| p["name"] == "R"));
}

#[test]
fn syntax_errors_point_at_the_offending_column() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("bad.surf"), "x = u;\ny = foo*v;\nz = 0;\ndomain u in [0, 1], v in [0, 1];\n").unwrap();
    let o = curvop(tmp.path(), &["geometry", "--surface-file", "bad.surf"]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    let lines: Vec<&str> = err.lines().collect();
    assert!(lines[0].starts_with("curvop: error[config]: bad.surf:2:5:"), "{err}");
    assert_eq!(lines[1], "y = foo*v;");
    assert_eq!(lines[2].find('^'), Some(4));

    let o = curvop(tmp.path(), &["geometry", "--surface-expr", "x = (u"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).starts_with("curvop: error[config]: <surface-expr>:1:"));
}

#[test]
fn error_categories_map_to_exit_codes() {
    let tmp = TempDir::new().unwrap();
    // chart collapses at the pole
    let o = curvop(tmp.path(), &["geometry", "--surface", "sphere", "--set", "cap=0", "--grid", "8x8"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).starts_with("curvop: error[degenerate]: "));

    let o = curvop(tmp.path(), &["geometry", "--surface", "klein"]);
    assert_eq!(code(&o), 2);
    let o = curvop(tmp.path(), &["geometry", "--surface", "cone", "--surface-expr", "x = u"]);
    assert_eq!(code(&o), 2);
    let o = curvop(tmp.path(), &["spectrum", "--surface", "cone", "--mass", "0"]);
    assert_eq!(code(&o), 2);
    let o = curvop(tmp.path(), &["geometry", "--bogus"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).starts_with("curvop: error[config]: "));

    // every failure leads with one machine-parsable line
    for args in [vec!["geometry", "--surface", "klein"], vec!["verify", "--surface", "sphere"]] {
        let o = curvop(tmp.path(), &args);
        let first = stderr(&o).lines().next().unwrap().to_string();
        let rest = first.strip_prefix("curvop: error[").unwrap();
        let (tag, msg) = rest.split_once("]: ").unwrap();
        assert!(["io", "config", "degenerate", "verify"].contains(&tag));
        assert!(!msg.is_empty());
    }

    std::fs::write(tmp.path().join("blocker"), "").unwrap();
    let o = curvop(tmp.path(), &["geometry", "--surface", "cone", "--grid", "4x4", "--out", "blocker/sub"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("curvop: error[io]: "));
}

#[test]
fn operators_on_the_cylinder() {
    let tmp = TempDir::new().unwrap();
    let o = curvop(tmp.path(), &["operators", "--surface", "cylinder", "--grid", "5x4", "--out", "ops"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in ["hamiltonian", "momentum", "angular_momentum", "rashba", "dresselhaus"] {
        let text = std::fs::read_to_string(tmp.path().join("ops").join(format!("{name}.json"))).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(!doc["terms"].as_array().unwrap().is_empty(), "{name}");
    }
    let o = curvop(tmp.path(), &["operators", "--surface", "cylinder", "--grid", "5x4", "--format", "csv", "--out", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let terms = std::fs::read_to_string(tmp.path().join("csv/dresselhaus_terms.csv")).unwrap();
    assert!(terms.lines().count() > 1);
    assert!(tmp.path().join("csv/dresselhaus_d1_2.csv").exists());
    assert!(tmp.path().join("csv/hamiltonian_d0_0.csv").exists());
}

#[test]
fn momentum_is_skipped_on_sheared_charts() {
    let tmp = TempDir::new().unwrap();
    let src = "x = u + 0.5*v; y = v; z = 0.2*u*v; domain u in [0, 1], v in [0, 1];";
    let o = curvop(tmp.path(), &["operators", "--surface-expr", src, "--grid", "4x4", "--out", "."]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("curvop: warning: "));
    assert!(tmp.path().join("hamiltonian.json").exists());
    assert!(!tmp.path().join("momentum.json").exists());
}

#[test]
fn tensors_command() {
    let tmp = TempDir::new().unwrap();
    let o = curvop(tmp.path(), &["tensors", "--surface", "torus", "--grid", "4x4", "--out", "."]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let header = std::fs::read_to_string(tmp.path().join("pauli.csv")).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count(), 2 + 24);
    assert!(tmp.path().join("rashba_tensor.csv").exists() && tmp.path().join("dresselhaus_tensor.csv").exists());
}

#[test]
fn spectrum_shift_on_the_cylinder() {
    let tmp = TempDir::new().unwrap();
    let o = curvop(
        tmp.path(),
        &["spectrum", "--surface", "cylinder", "--set", "l=3.141592653589793", "--modes", "0..1", "--nodes", "400", "--out", "."],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(tmp.path().join("spectrum.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "m,n,eigenvalue_without_Vg,eigenvalue_with_Vg,shift");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!((r[4] + 0.25).abs() < 1e-8, "{r:?}");
    }
    assert!((rows[0][2] - 1.0).abs() < 1e-3);
}

#[test]
fn verify_reports_and_rejects_other_surfaces() {
    let tmp = TempDir::new().unwrap();
    let o = curvop(tmp.path(), &["verify", "--grid", "8x8", "--out", "."]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(doc["surface"], "cone");

    let o = curvop(tmp.path(), &["verify", "--surface", "sphere"]);
    assert_eq!(code(&o), 2);
    let o = curvop(tmp.path(), &["verify", "--format", "csv"]);
    assert_eq!(code(&o), 2);
    let o = curvop(tmp.path(), &["verify", "--grid", "4x4", "--tol", "1e-6", "--out", "loose"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("loose/verify_report.json")).unwrap()).unwrap();
    assert_eq!(doc["tolerance"].as_f64(), Some(1e-6));
    assert_eq!(doc["grid"], serde_json::json!([4, 4]));
    let o = curvop(tmp.path(), &["verify", "--tol", "-1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn flags_override_the_config_file() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("ring.surf"), "x = v*cos(u); y = v*sin(u); z = 0; params R = 1; domain u in [0, 2*pi) periodic, v in [R, 2*R];").unwrap();
    std::fs::write(
        tmp.path().join("run.toml"),
        "surface_file = \"ring.surf\"\ngrid = \"3x3\"\nformat = \"json\"\nout = \"from-file\"\n[set]\nR = 2.0\n",
    )
    .unwrap();
    let o = curvop(tmp.path(), &["geometry", "--config", "run.toml"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("from-file/geometry.json")).unwrap()).unwrap();
    let r = doc["parameters"].as_array().unwrap().iter().find(|p| p["name"] == "R").unwrap()["value"].as_f64().unwrap();
    assert_eq!(r, 2.0);

    let o = curvop(tmp.path(), &["geometry", "--config", "run.toml", "--set", "R=3", "--format", "csv", "--out", "cli"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(tmp.path().join("cli/metric.csv").exists());
    assert!(!tmp.path().join("cli/geometry.json").exists());

    std::fs::write(tmp.path().join("typo.toml"), "surfac = \"cone\"\n").unwrap();
    let o = curvop(tmp.path(), &["geometry", "--config", "typo.toml"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn help_and_version_exit_cleanly() {
    let tmp = TempDir::new().unwrap();
    let o = curvop(tmp.path(), &["--help"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("verify"));
    assert_eq!(code(&curvop(tmp.path(), &["--version"])), 0);
}
