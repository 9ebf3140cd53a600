use std::fs;
use std::path::Path;

use coexistence::cli::{cli_main, EXIT_FILE, EXIT_USAGE};
use coexistence::harness::HarnessReport;
use coexistence::io::{read_document, write_effect, MatrixDocument};
use coexistence::preservers::{PreserverSpec, StandardAutomorphismSpec};
use coexistence::random::{random_effect, rng_from_seed};
use coexistence::{Effect, HermitianMatrix};
use tempfile::TempDir;

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("coexist").chain(args.iter().copied()))
}

fn diag(path: &Path, d: &[f64]) -> String {
    write_effect(path, &Effect::new(HermitianMatrix::from_diagonal(d)).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn check_reports_verdicts_through_exit_codes() {
    let dir = TempDir::new().unwrap();
    let a = diag(&dir.path().join("a.mat"), &[0.3, 0.7]);
    let b = diag(&dir.path().join("b.mat"), &[0.5, 0.2]);
    assert_eq!(run(&["check", &a, &b]), 0);

    let p = diag(&dir.path().join("p.mat"), &[1.0, 0.0]);
    let c = dir.path().join("c.mat");
    fs::write(&c, r#"{"dim":2,"kind":"effect","entries":[[0.5,0],[0.4,0],[0.4,0],[0.5,0]]}"#).unwrap();
    assert_eq!(run(&["check", &p, c.to_str().unwrap()]), 1);
}

#[test]
fn check_writes_a_certificate() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.mat");
    let b = dir.path().join("b.mat");
    write_effect(&a, &random_effect(3, None, 1).unwrap()).unwrap();
    write_effect(&b, &random_effect(3, None, 2).unwrap()).unwrap();
    let cert = dir.path().join("cert.json");
    let code = run(&["check", a.to_str().unwrap(), b.to_str().unwrap(), "--cert", cert.to_str().unwrap()]);
    if code == 0 {
        let doc: serde_json::Value = read_document(&cert).unwrap();
        for key in ["m", "n", "e", "f", "g"] {
            let m: MatrixDocument = serde_json::from_value(doc[key].clone()).unwrap();
            assert_eq!(m.dim, 3);
        }
    } else {
        assert!(!cert.exists());
    }
}

#[test]
fn bad_inputs_map_to_their_exit_codes() {
    let dir = TempDir::new().unwrap();
    let a = diag(&dir.path().join("a.mat"), &[0.3, 0.7]);
    let missing = dir.path().join("missing.mat");
    assert_eq!(run(&["check", &a, missing.to_str().unwrap()]), EXIT_FILE);
    let garbage = dir.path().join("garbage.mat");
    fs::write(&garbage, "not json").unwrap();
    assert_eq!(run(&["check", &a, garbage.to_str().unwrap()]), EXIT_FILE);
    let big = dir.path().join("big.mat");
    fs::write(&big, r#"{"dim":1,"kind":"effect","entries":[[1.5,0]]}"#).unwrap();
    assert_eq!(run(&["check", &a, big.to_str().unwrap()]), EXIT_USAGE);
    assert_eq!(run(&["check", &a]), EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(run(&["--tol=-1", "stratify", &a]), EXIT_USAGE);
    assert_eq!(run(&["harness", "--dims", "1"]), EXIT_USAGE);
    assert_eq!(run(&["harness", "--suites", "nope"]), EXIT_USAGE);
}

#[test]
fn stratify_and_apply() {
    let dir = TempDir::new().unwrap();
    let a = diag(&dir.path().join("a.mat"), &[1.0, 0.4, 0.0]);
    assert_eq!(run(&["stratify", &a]), 0);

    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"f":{"kind":"power","alpha":2.0},"dim":3}"#).unwrap();
    let out = dir.path().join("out.mat");
    assert_eq!(run(&["apply", "--map", "trace-threshold", "--spec", spec.to_str().unwrap(), &a, "--out", out.to_str().unwrap()]), 0);
    let image = coexistence::io::read_effect(&out).unwrap();
    // Trace 1.4 sits between the thresholds, so the map leaves it alone.
    assert!(image.distance(&coexistence::io::read_effect(Path::new(&a)).unwrap()) < 1e-15);

    assert_eq!(run(&["apply", "--map", "standard", "--spec", spec.to_str().unwrap(), &a]), EXIT_USAGE);
    assert_eq!(run(&["apply", "--map", "bogus", "--spec", spec.to_str().unwrap(), &a]), EXIT_USAGE);
}

#[test]
fn reconstruct_writes_the_unitary() {
    let dir = TempDir::new().unwrap();
    let spec = StandardAutomorphismSpec::random(&mut rng_from_seed(3), 3, true, false);
    let path = dir.path().join("spec.json");
    coexistence::io::write_document(&path, &PreserverSpec::Standard(spec.clone())).unwrap();
    let out = dir.path().join("u.mat");
    assert_eq!(run(&["reconstruct", "--map-spec", path.to_str().unwrap(), "--dim", "3", "--out", out.to_str().unwrap()]), 0);
    let u = read_document::<MatrixDocument>(&out).unwrap().to_unitary().unwrap();
    assert!(coexistence::reconstruction::phase_distance(u.matrix(), spec.u.matrix()) < 1e-8);
    assert_eq!(run(&["reconstruct", "--map-spec", path.to_str().unwrap(), "--dim", "4"]), EXIT_USAGE);
}

#[test]
fn harness_reports_repeat_apart_from_timing() {
    let dir = TempDir::new().unwrap();
    let paths = [dir.path().join("r1.json"), dir.path().join("r2.json")];
    for p in &paths {
        let code = run(&["harness", "--dims", "2,3", "--trials", "50", "--seed", "7", "--out", p.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    let strip = |p: &Path| -> String {
        let text = fs::read_to_string(p).unwrap();
        let report: HarnessReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report.suites.len(), 10);
        coexistence::io::to_precise_json(&report.without_timing()).unwrap()
    };
    assert_eq!(strip(&paths[0]), strip(&paths[1]));
    let report: HarnessReport = read_document(&paths[0]).unwrap();
    assert_eq!(report.seed, 7);
    assert_eq!(report.config.dims, vec![2, 3]);
}
