use std::path::Path;
use std::process::{Command, Output};

fn pairvqe(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairvqe"))
        .env_remove("PAIRVQE_OUT")
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("spawn pairvqe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn quick_selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = pairvqe(dir.path(), &["selftest", "--quick"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(!text.contains("FAIL"), "{text}");
    assert!(text.contains("7 of 7 checks passed"), "{text}");
}

#[test]
fn corrupted_calibration_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cal");
    std::fs::write(&path, "qubit 0 u2 0.001\nnonsense here\n").unwrap();
    let o = pairvqe(dir.path(), &["selftest", "--quick", "--calibration", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("parse error"), "{}", stderr(&o));

    let o = pairvqe(dir.path(), &["curve", "--noise", path.to_str().unwrap(), "--scan", "1.4:1.4:1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("calibration"), "{}", stderr(&o));
}

#[test]
fn curve_writes_tables_and_reproduces_bytewise() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["curve", "--system", "h2", "--scan", "0.8:1.6:2", "--seed", "17"];
    let oa = pairvqe(a.path(), &args);
    let ob = pairvqe(b.path(), &args);
    assert!(oa.status.success(), "{}", stderr(&oa));
    assert!(ob.status.success(), "{}", stderr(&ob));
    assert_eq!(oa.stdout, ob.stdout);
    for name in ["curve_h2.dat", "curve_h2_inset.dat", "curve_h2.json"] {
        let fa = std::fs::read(a.path().join(name)).unwrap();
        let fb = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(fa, fb, "{name} differs between identical runs");
    }
    let table = std::fs::read_to_string(a.path().join("curve_h2.dat")).unwrap();
    assert!(table.starts_with("# pairvqe "));
    assert!(table.contains("# seed 17"));
    let rows: Vec<_> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("curve_h2.json")).unwrap()).unwrap();
    assert!(json.is_object());
}

#[test]
fn different_seeds_change_shot_noise() {
    let dir = tempfile::tempdir().unwrap();
    let o1 = pairvqe(dir.path(), &["curve", "--scan", "1.4:1.4:1", "--seed", "1"]);
    let o2 = pairvqe(dir.path(), &["curve", "--scan", "1.4:1.4:1", "--seed", "2"]);
    assert!(o1.status.success() && o2.status.success());
    let row = |o: &Output| stdout(o).lines().find(|l| !l.starts_with('#')).unwrap().to_string();
    assert_ne!(row(&o1), row(&o2));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("nested");
    let o = Command::new(env!("CARGO_BIN_EXE_pairvqe"))
        .env("PAIRVQE_OUT", &target)
        .args(["curve", "--shots", "exact", "--scan", "1.4:1.4:1"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(target.join("curve_h2.dat").exists());
}

#[test]
fn strict_curve_fails_on_unconverged_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = pairvqe(dir.path(), &["curve", "--shots", "exact", "--scan", "1.4:1.4:1", "--max-outer", "0", "--strict"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("point 1.4"), "{}", stderr(&o));
}

#[test]
fn scan_and_vtable_emit_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = pairvqe(dir.path(), &["scan", "--r", "2", "--noise", "ibm14", "--intervals", "4", "--seed", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["raw", "verified", "projected", "polytope"] {
        assert!(dir.path().join(format!("scan_r2_{name}.dat")).exists(), "{name}");
    }
    assert!(stdout(&o).contains("V raw"));

    let o = pairvqe(dir.path(), &["vtable", "--noise", "ibm14", "--intervals", "4", "--resamples", "50", "--seeds", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(dir.path().join("vtable.dat")).unwrap();
    let rows: Vec<_> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(dir.path().join("vtable_ordering.dat").exists());
}

#[test]
fn integrals_dump_formats() {
    let dir = tempfile::tempdir().unwrap();
    let o = pairvqe(dir.path(), &["integrals", "--system", "h3plus", "--at", "1.65"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("NORB=3"));

    let o = pairvqe(dir.path(), &["integrals", "--basis", "ao", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.is_object());

    let o = pairvqe(dir.path(), &["integrals", "--format", "xml"]);
    assert!(!o.status.success());
}

#[test]
fn invalid_arguments_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["curve", "--shots", "0"][..],
        &["curve", "--scan", "1:2"],
        &["curve", "--system", "he2"],
        &["curve", "--noise", "uniform:0.1:0.2"],
        &["scan", "--symmetry", "polytope"],
    ] {
        let o = pairvqe(dir.path(), args);
        assert!(!o.status.success(), "{args:?} accepted");
        assert!(stderr(&o).contains("error"), "{args:?}: {}", stderr(&o));
    }
}
