use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use photon_cartan::circuit::OpticalCircuit;
use photon_cartan::compiler::Target;
use photon_cartan::matrix::{is_unitary, phase_distance, ComplexMatrix, ToleranceConfig};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_photon-cartan"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn random_is_deterministic_and_unitary() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(
        code(&run(&[
            "random",
            "--dim",
            "4",
            "--seed",
            "7",
            "--out",
            s(&a)
        ])),
        0
    );
    assert_eq!(
        code(&run(&[
            "random",
            "--dim",
            "4",
            "--seed",
            "7",
            "--out",
            s(&b)
        ])),
        0
    );
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let o = run(&["random", "--dim", "8", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    let u = ComplexMatrix::from_json(&stdout(&o)).unwrap();
    assert_eq!(u.dim(), 8);
    assert!(is_unitary(&u, &ToleranceConfig::default()));

    assert_eq!(code(&run(&["random", "--dim", "3", "--seed", "1"])), 2);
}

#[test]
fn compile_walk_verifies_within_budget() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "walk.json", &Target::Walk.matrix().to_json());
    let o = run(&[
        "compile",
        "--matrix",
        s(&m),
        "--convention",
        "ps",
        "--verify",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let c = OpticalCircuit::deserialize(&stdout(&o)).unwrap();
    assert!(c.len() <= 20);
    let err = stderr(&o);
    assert!(err.contains("vs 25 for ps_csd_swap"), "{err}");
    assert!(err.contains("verification passed"), "{err}");
}

#[test]
fn compile_identity_optimizes_to_nothing() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "id.json", &ComplexMatrix::identity(4).to_json());
    let o = run(&["compile", "--matrix", s(&m), "--optimize"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(OpticalCircuit::deserialize(&stdout(&o)).unwrap().is_empty());
}

#[test]
fn compile_rejects_bad_matrices() {
    let dir = TempDir::new().unwrap();
    let bad = ComplexMatrix::from_real_rows(&[
        &[1.0, 1.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
    .unwrap();
    let m = write(&dir, "bad.json", &bad.to_json());
    let o = run(&["compile", "--matrix", s(&m)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("residual"), "{}", stderr(&o));

    let m = write(&dir, "junk.json", "{\"dim\": 2}");
    assert_eq!(code(&run(&["compile", "--matrix", s(&m)])), 2);
    assert_eq!(
        code(&run(&["compile", "--matrix", "/nonexistent/m.json"])),
        2
    );

    let m8 = write(&dir, "id8.json", &ComplexMatrix::identity(8).to_json());
    assert_eq!(
        code(&run(&["compile", "--matrix", s(&m8), "--convention", "ps"])),
        2
    );
}

#[test]
fn compile_writes_out_file() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "qft.json", &Target::Qft.matrix().to_json());
    let out = dir.path().join("c.json");
    let o = run(&[
        "compile",
        "--matrix",
        s(&m),
        "--emit-phase-ps",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).is_empty());
    let c = OpticalCircuit::deserialize(&fs::read_to_string(&out).unwrap()).unwrap();
    let u = photon_cartan::simulator::simulate(&c).unwrap();
    assert!(u.max_diff(&Target::Qft.matrix()) < 1e-9);
}

#[test]
fn simulate_paths() {
    let dir = TempDir::new().unwrap();
    let empty =
        OpticalCircuit::new(photon_cartan::cartan::DofConvention::PolarizationSpatial, 2).unwrap();
    let p = write(&dir, "empty.json", &empty.serialize());
    let o = run(&["simulate", "--circuit", s(&p)]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        ComplexMatrix::from_json(&stdout(&o)).unwrap(),
        ComplexMatrix::identity(4)
    );

    let m = write(&dir, "walk.json", &Target::Walk.matrix().to_json());
    let c = dir.path().join("walk_c.json");
    assert_eq!(
        code(&run(&[
            "compile",
            "--matrix",
            s(&m),
            "--convention",
            "ps",
            "--out",
            s(&c)
        ])),
        0
    );
    let o = run(&["simulate", "--circuit", s(&c)]);
    let u = ComplexMatrix::from_json(&stdout(&o)).unwrap();
    assert!(phase_distance(&u, &Target::Walk.matrix()).unwrap().distance < 1e-9);

    let bad = empty.serialize().replace(
        "\"elements\": []",
        "\"elements\": [{\"kind\": \"mirror\", \"modes\": [0]}]",
    );
    let p = write(&dir, "bad.json", &bad);
    assert_eq!(code(&run(&["simulate", "--circuit", s(&p)])), 2);
}

#[test]
fn verify_paths() {
    let dir = TempDir::new().unwrap();
    let walk = write(&dir, "walk.json", &Target::Walk.matrix().to_json());
    let qft = write(&dir, "qft.json", &Target::Qft.matrix().to_json());
    let c = dir.path().join("c.json");
    run(&[
        "compile",
        "--matrix",
        s(&walk),
        "--convention",
        "ps",
        "--out",
        s(&c),
    ]);

    let o = run(&["verify", "--circuit", s(&c), "--matrix", s(&walk)]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["distance", "global_phase", "passed", "element_total"] {
        assert!(r.get(key).is_some(), "{key}");
    }
    assert_eq!(r["passed"], true);

    let o = run(&["verify", "--circuit", s(&c), "--matrix", s(&qft)]);
    assert_eq!(code(&o), 1);
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r["distance"].as_f64().unwrap() > 0.3);

    assert_eq!(
        code(&run(&[
            "verify",
            "--circuit",
            "/nonexistent.json",
            "--matrix",
            s(&walk)
        ])),
        2
    );
}

#[test]
fn target_paths() {
    let o = run(&["target", "--name", "walk"]);
    assert_eq!(code(&o), 0);
    let u = ComplexMatrix::from_json(&stdout(&o)).unwrap();
    assert_eq!(u, Target::Walk.matrix());

    let o = run(&["target", "--name", "qft", "--convention", "sp", "--compile"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["verification"]["passed"], true);
    let c = OpticalCircuit::deserialize(&doc["circuit"].to_string()).unwrap();
    assert!(c.len() <= 20);
    assert!(stderr(&o).contains("19"), "{}", stderr(&o));

    assert_eq!(code(&run(&["target", "--name", "grover"])), 2);
}

#[test]
fn random_compile_verify_end_to_end() {
    let dir = TempDir::new().unwrap();
    let cases = [("4", "ps"), ("4", "sp"), ("8", "sp")];
    for (dim, conv) in cases {
        for seed in 0..50 {
            let seed = seed.to_string();
            let m = dir.path().join(format!("u{dim}{conv}{seed}.json"));
            let c = dir.path().join(format!("c{dim}{conv}{seed}.json"));
            let o = run(&["random", "--dim", dim, "--seed", &seed, "--out", s(&m)]);
            assert_eq!(code(&o), 0);
            let o = run(&[
                "compile",
                "--matrix",
                s(&m),
                "--convention",
                conv,
                "--verify",
                "--optimize",
                "--out",
                s(&c),
            ]);
            assert_eq!(code(&o), 0, "dim {dim} {conv} seed {seed}: {}", stderr(&o));
            let o = run(&["verify", "--circuit", s(&c), "--matrix", s(&m)]);
            assert_eq!(code(&o), 0, "dim {dim} {conv} seed {seed}");
        }
    }
}
