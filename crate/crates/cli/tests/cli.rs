use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use yindex::geometry::canonical_surface;
use yindex::hopf::{sample_spec, ImmersionFile};

fn yindex(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yindex"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("YINDEX_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn index_writes_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = yindex(dir.path(), &["index", "--surface", "ycone", "--h", "0.1"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("index-ycone-h0.1.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["config"]["command"]["name"], "index");
    assert_eq!(json["result"]["bulk"]["index"], 2);
    assert_eq!(json["result"]["bulk"]["index"], json["result"]["dtn"]["index"]);
    assert_eq!(json["result"]["bulk"]["nullity"], json["result"]["dtn"]["nullity"]);
    let csv = fs::read_to_string(dir.path().join("index-ycone-h0.1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("h,k,lambda,class"));
    assert!(lines.next().unwrap().ends_with(",negative"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        assert_eq!(code(&yindex(dir, &["index", "--h", "0.15", "--seed", "7"])), 0);
        assert_eq!(
            code(&yindex(
                dir,
                &["verify", "--surface", "ycone", "--n", "16", "--method", "fd"]
            )),
            0
        );
    }
    for name in [
        "index-ycone-h0.15.json",
        "index-ycone-h0.15.csv",
        "verify-ycone-n16.json",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn failed_expectation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = yindex(
        dir.path(),
        &[
            "index",
            "--surface",
            "equatorial-disk",
            "--h",
            "0.15",
            "--expect-index",
            "4",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("FAIL expected-index"));
    let o = yindex(dir.path(), &["verify", "--perturb", "angle-imbalance", "--n", "32"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("FAIL y-balance"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["index", "--h", "0"],
        vec!["index", "--h", "-0.1"],
        vec!["index", "--surface", "torus"],
        vec!["frobnicate"],
        vec!["verify"],
        vec!["verify", "--input", "/nonexistent/immersion.json"],
        vec!["steklov", "--modes", "0"],
        vec!["index", "--surface", "critical-catenoid", "--route", "dtn"],
    ] {
        let o = yindex(dir.path(), &args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_yindex"))
        .args(["fields", "--h", "0.1"])
        .env("YINDEX_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(dir.path().join("fields-ycone-h0.1.json").is_file());
}

#[test]
fn verify_reads_immersion_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = canonical_surface("ycone", &Default::default()).unwrap();
    let file = ImmersionFile::from_grids(&sample_spec(&spec, 24, 24).unwrap());
    let path = dir.path().join("cone.json");
    fs::write(&path, file.to_json().unwrap()).unwrap();
    let o = yindex(dir.path(), &["verify", "--input", path.to_str().unwrap(), "--n", "24"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify-cone-n24.json")).unwrap()).unwrap();
    assert_eq!(report["result"]["method"], "finite-difference");

    fs::write(&path, "{\"n_r\": 4}").unwrap();
    assert_eq!(
        code(&yindex(dir.path(), &["verify", "--input", path.to_str().unwrap()])),
        1
    );
}

#[test]
fn steklov_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = yindex(
        dir.path(),
        &[
            "steklov",
            "--gamma",
            "dirichlet",
            "--h",
            "0.1",
            "--modes",
            "3",
            "--max-rel-err",
            "0.05",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("steklov-dirichlet-h0.1.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "n,delta,analytic,error,pass");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("1,"));
}
