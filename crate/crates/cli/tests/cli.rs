use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use commutant_core::dynamics::random_compact;
use commutant_core::linalg::{Complex, WindowedMatrix};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_commutant-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn points(v: &Value) -> Vec<(f64, f64)> {
    v["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p[0].as_f64().unwrap(), p[1].as_f64().unwrap()))
        .collect()
}

#[test]
fn spectrum_of_two_valued_diagonal() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "d.json",
        r#"{"op":"diag","values":[[0.5,0],[0.7,0]],"tail":[0.7,0]}"#,
    );
    let out = run(&["spectrum", s(&spec)]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_of(&out);
    assert_eq!(r["verdict"]["conclusion"], "NotHypercyclic");
    assert_eq!(r["verdict"]["rule"], "RieszSpectrum");
    let pts = points(&r["sigma_j"]);
    let want = [-0.2, 0.0, 0.2];
    assert_eq!(pts.len(), 3);
    for ((x, y), w) in pts.iter().zip(want) {
        assert!((x - w).abs() < 1e-12 && *y == 0.0);
    }
    assert_eq!(r["kitai"]["passes"], false);
}

#[test]
fn spectrum_of_scaled_shift_is_inconclusive() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "s.json",
        r#"{"op":"scaled","c":[2,0],"inner":{"op":"backward_shift"}}"#,
    );
    let r = json_of(&run(&["spectrum", s(&spec)]));
    assert_eq!(r["sigma_j"]["disks"][0]["radius"], 4.0);
    assert_eq!(r["kitai"]["passes"], true);
    assert_eq!(r["verdict"]["conclusion"], "Inconclusive");

    let none = json_of(&run(&["spectrum", s(&spec), "--map", "none"]));
    assert_eq!(none["sigma"]["disks"][0]["radius"], 2.0);
    assert!(none.get("verdict").is_none());
}

#[test]
fn spectrum_of_identity_is_zero_map() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "i.json", r#"{"op":"poly_b","coeffs":[[1,0]]}"#);
    let r = json_of(&run(&["spectrum", s(&spec)]));
    assert_eq!(r["verdict"]["rule"], "ZeroMap");
}

#[test]
fn spectrum_exit_codes() {
    let dir = TempDir::new().unwrap();
    let unknown = write(&dir, "u.json", r#"{"op":"diag","rule":"reciprocal"}"#);
    let out = run(&["spectrum", s(&unknown)]);
    assert_eq!(out.status.code(), Some(3));
    // the report is still written, with the eigenpair verdict
    assert_eq!(json_of(&out)["verdict"]["rule"], "PointSpectrumPair");

    let broken = write(&dir, "b.json", r#"{"op":"no_such_operator"}"#);
    assert_eq!(run(&["spectrum", s(&broken)]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "/nonexistent/spec.json"]).status.code(), Some(2));
}

fn matrix_file(dir: &TempDir, name: &str, m: &WindowedMatrix) -> PathBuf {
    write(dir, name, &serde_json::to_string(m).unwrap())
}

fn orbit_values(map: &Path, init: &Path, steps: &str) -> Vec<WindowedMatrix> {
    let out = run(&["orbit", s(map), s(init), "--steps", steps]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    json_of(&out)["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| serde_json::from_value(r["value"].clone()).unwrap())
        .collect()
}

#[test]
fn orbit_climbs_subdiagonals() {
    let dir = TempDir::new().unwrap();
    let map = write(&dir, "m.json", r#"{"map":"commutator","op":{"op":"backward_shift"}}"#);
    let init = matrix_file(&dir, "a.json", &WindowedMatrix::unit(3, 1));
    let values = orbit_values(&map, &init, "2");
    assert_eq!(values.len(), 3);
    for (step, v) in values.iter().enumerate() {
        assert!(!v.is_zero());
        for (i, j, _) in v.nonzeros() {
            assert_eq!(i - j, 2 - step as i64, "step {step}");
        }
    }
}

#[test]
fn orbit_of_diagonal_eigenvector_and_distances() {
    let dir = TempDir::new().unwrap();
    let map = write(
        &dir,
        "m.json",
        r#"{"map":"commutator","op":{"op":"diag","values":[[0.3,0],[0,0.9]],"tail":[0,0]}}"#,
    );
    let init = matrix_file(&dir, "a.json", &WindowedMatrix::unit(1, 2));
    let out = run(&[
        "orbit",
        s(&map),
        s(&init),
        "--steps",
        "4",
        "--target",
        "e1e2",
        "--norm",
        "hs",
    ]);
    let r = json_of(&out);
    let lambda = Complex::new(0.3, -0.9);
    for rec in r["records"].as_array().unwrap() {
        let n = rec["step"].as_u64().unwrap() as u32;
        let v: WindowedMatrix = serde_json::from_value(rec["value"].clone()).unwrap();
        assert!((v.get(1, 2) - lambda.powu(n)).norm() < 1e-15);
        let want = (lambda.powu(n) - 1.0).norm();
        assert!((rec["distances"]["e1e2"].as_f64().unwrap() - want).abs() < 1e-14);
    }
}

#[test]
fn orbit_of_a_power_skips_steps() {
    let dir = TempDir::new().unwrap();
    let single = write(&dir, "m1.json", r#"{"map":"commutator","op":{"op":"backward_shift"}}"#);
    let double = write(
        &dir,
        "m2.json",
        r#"{"map":"power","n":2,"inner":{"map":"commutator","op":{"op":"backward_shift"}}}"#,
    );
    let init = matrix_file(&dir, "a.json", &WindowedMatrix::unit(4, 2));
    let a = orbit_values(&single, &init, "2");
    let b = orbit_values(&double, &init, "1");
    assert!(a[2].same_operator(&b[1]));
}

#[test]
fn orbit_over_the_cap_exits_4() {
    let dir = TempDir::new().unwrap();
    let map = write(&dir, "m.json", r#"{"map":"commutator","op":{"op":"backward_shift"}}"#);
    let init = matrix_file(&dir, "a.json", &WindowedMatrix::unit(1, 1));
    let out = run(&["orbit", s(&map), s(&init), "--steps", "40", "--cap", "16"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap of 16"));
}

#[test]
fn certify_random_corpus_passes() {
    let out = run(&[
        "certify",
        "--random",
        "42,16,0.5",
        "--c",
        "1,0",
        "--eps",
        "0.2",
        "--n-max",
        "24",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_of(&out);
    assert_eq!(r["verdict"], "NoNearApproachObserved");
    assert_eq!(r["corpus"]["seed"], 42);
    assert!(r["per_n"]
        .as_array()
        .unwrap()
        .iter()
        .all(|row| row["consistent"] == true));
}

#[test]
fn certify_rejects_large_epsilon() {
    let out = run(&["certify", "--random", "42,16,0.5", "--c", "1,0", "--eps", "0.34"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("3|c| eps"));
    // the smallness condition scales with |c|
    let out = run(&["certify", "--random", "42,16,0.5", "--c", "0,2", "--eps", "0.2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["certify", "--random", "1,2"]).status.code(), Some(2));
}

#[test]
fn degree_one_polynomial_matches_the_multiplier() {
    let base = ["certify", "--random", "7,16,0.5", "--eps", "0.2", "--n-max", "12"];
    let cb = json_of(&run(&[&base[..], &["--c", "1,0"]].concat()));
    let pb = json_of(&run(&[&base[..], &["--poly", "0,1"]].concat()));
    for field in ["c", "epsilon", "n_max", "k_eps", "z0", "per_n", "verdict", "corpus"] {
        assert_eq!(cb[field], pb[field], "{field}");
    }
}

#[test]
fn certify_from_file_and_exponent_choice() {
    let dir = TempDir::new().unwrap();
    let a = random_compact(500, 6, 0.5).unwrap().scale(Complex::new(0.2, 0.0));
    let path = matrix_file(&dir, "a.json", &a);
    let ok = run(&["certify", s(&path), "--poly", "0,1,1.5", "--n-max", "3"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = run(&[
        "certify",
        s(&path),
        "--poly",
        "0,1,1.5",
        "--n-max",
        "3",
        "--exponent",
        "degree",
    ]);
    assert_eq!(bad.status.code(), Some(5));
    assert_eq!(json_of(&bad)["verdict"], "IdentityViolation");
}

#[test]
fn certify_csv_summary_and_out_file() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("r.csv");
    let out = run(&[
        "certify",
        "--random",
        "3,16,0.5",
        "--format",
        "csv-summary",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,orbit_distance,"));
    assert!(lines.count() > 0);
}

#[test]
fn certify_is_reproducible() {
    let args = ["certify", "--random", "11,16,0.5", "--c", "1.5,0"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn verify_suites() {
    for suite in ["matr", "tau", "normal", "paranormal", "hc", "spectral", "all"] {
        let out = run(&["verify", "--suite", suite]);
        let text = String::from_utf8_lossy(&out.stdout);
        assert_eq!(out.status.code(), Some(0), "{suite}: {text}");
        assert!(text.contains("PASS") && !text.contains("FAIL"));
    }
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = bin()
        .args(["verify", "--suite", "tau"])
        .env("COMMUTANT_LAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_documents_defaults() {
    let text = String::from_utf8(run(&["certify", "--help"]).stdout).unwrap();
    for needle in ["[default: 0.2]", "[default: 24]"] {
        assert!(text.contains(needle), "{needle}");
    }
    let text = String::from_utf8(run(&["orbit", "--help"]).stdout).unwrap();
    assert!(text.contains("[default: op]") && text.contains("[default: 1024]"));
    let text = String::from_utf8(run(&["verify", "--help"]).stdout).unwrap();
    assert!(text.contains("[default: 16]"));
}
