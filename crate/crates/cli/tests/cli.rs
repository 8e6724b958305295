use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cvsheet"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn missing_c0_exits_2_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "time.dt = 0.1\n").unwrap();
    let out = bin().arg("simulate").arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("geometry.c0"));
    let manifest = std::fs::read_to_string(dir.path().join("o/manifest.json")).unwrap();
    assert!(manifest.contains("geometry.c0"));
}

#[test]
fn equilibrium_scenario_keeps_diagnostics_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().arg("simulate").arg(scenarios().join("equilibrium.toml")).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 11);
    for (c, name) in header.iter().enumerate() {
        if ["step", "t", "growth_rate"].contains(name) || name.starts_with('w') || name.starts_with("induction") || name.starts_with("div") {
            continue;
        }
        let first = rows[0][c];
        assert!(rows.iter().all(|r| (r[c] - first).abs() <= 1e-12 * (1.0 + first.abs())), "{name} changes");
    }
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["grid"]["nx"], 16);
}

#[test]
fn unstable_data_is_refused_by_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gated.toml");
    std::fs::write(&cfg, "geometry.c0 = 0.1\ngate.stability = true\ngrid.nx = 8\ngeometry.Nz = 9\n").unwrap();
    let out = bin().arg("simulate").arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("o/manifest.json").exists());
}

#[test]
fn dispersion_reports_pure_kh_growth() {
    let out = bin().args(["dispersion", "--v", "1,0", "--kmax", "1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let row = text.lines().find(|l| l.starts_with("1,0,")).unwrap();
    assert!(row.contains("Unstable"));
    let s2: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((s2 - 1.0).abs() < 1e-12);
}

#[test]
fn stability_check_of_a_current_sheet() {
    let out = bin().args(["stability-check", "--hplus", "1,0", "--hminus", "0,1"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("lambda_min 1.0"));
    let out = bin().args(["stability-check", "--v", "0,1", "--hplus", "1,0", "--hminus", "1,0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selftest_filter_and_negative_control() {
    let out = bin().args(["selftest", "--filter", "divcurl"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), 1);
    let out = bin().args(["selftest", "--filter", "divcurl", "--tighten", "1e6"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL 3 divcurl-roundtrip"));
}

#[test]
fn dno_selftest_runs_only_dn_criteria() {
    let out = bin().arg("dno-selftest").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    let keys: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS")).map(|l| l.split(' ').nth(2).unwrap()).collect();
    assert_eq!(keys, ["dno-flat:", "dno-structure:"]);
}
