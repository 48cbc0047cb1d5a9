//! End-to-end tests of the `timarg` binary: exit codes, stdout verdicts,
//! artifact round-trips, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_timarg"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[track_caller]
fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {} stderr: {}",
        stdout_of(out),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn kari_gen_counts_and_is_deterministic() {
    let out = run(&["kari-gen", "--builtin"]);
    assert_exit(&out, 0);
    assert_eq!(stdout_of(&out), "2947\n");

    // The fixture system file describes the same map.
    let sys = fixture("rotation-system.json");
    let out = run(&["kari-gen", sys.to_str().unwrap(), "--verify"]);
    assert_exit(&out, 0);
    assert_eq!(stdout_of(&out), "2947\n");

    // Two runs write byte-identical alphabets.
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_exit(&run(&["kari-gen", "--builtin", "-o", a.to_str().unwrap()]), 0);
    assert_exit(&run(&["kari-gen", "--builtin", "-o", b.to_str().unwrap()]), 0);
    let bytes_a = std::fs::read(&a).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, std::fs::read(&b).unwrap());
}

#[test]
fn vertices_reports_the_library_classes() {
    let out = run(&["vertices", "--case", "d2-nnn"]);
    assert_exit(&out, 0);
    let text = stdout_of(&out);
    assert!(text.contains("13 vertices in 6 classes"), "{text}");
    let sizes_line = text
        .lines()
        .find(|l| l.starts_with("class sizes:"))
        .expect("sizes line");
    let mut sizes: Vec<u32> = sizes_line["class sizes:".len()..]
        .split_whitespace()
        .map(|s| s.parse().unwrap())
        .collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![1, 2, 2, 2, 2, 4]);

    let out = run(&["vertices", "--case", "d3-nn"]);
    assert_exit(&out, 0);
    assert!(stdout_of(&out).contains("98 vertices in 10 classes"));
}

#[test]
fn vertices_projects_raw_strips() {
    let out = run(&["vertices", "--d", "2", "--strip", "2", "1", "--targets", "h"]);
    assert_exit(&out, 0);
    assert!(stdout_of(&out).contains("3 vertices in 2 classes"));
}

#[test]
fn exact_rejects_the_disagreement_spec() {
    let spec = fixture("disagreement-spec.json");
    let out = run(&["exact", "--case", "d2-nnn", spec.to_str().unwrap(), "--verify"]);
    assert_exit(&out, 1);
    assert_eq!(stdout_of(&out), "verdict false\n");
}

#[test]
fn marginal_check_separates_feasible_from_infeasible() {
    let dir = tempfile::tempdir().unwrap();

    // An impossible pair specification is refuted with a certificate.
    let spec = fixture("disagreement-spec.json");
    let cert = dir.path().join("cert.json");
    let out = run(&[
        "marginal-check",
        spec.to_str().unwrap(),
        "--level",
        "2",
        "--verify",
        "-o",
        cert.to_str().unwrap(),
    ]);
    assert_exit(&out, 1);
    assert_eq!(stdout_of(&out), "infeasible\n");
    let cert_text = std::fs::read_to_string(&cert).unwrap();
    assert!(cert_text.contains("\"kind\": \"infeasible\""));
    assert!(cert_text.contains("dual_multipliers"));

    // A symmetrized pattern is a true marginal and passes.
    let pattern = fixture("checkerboard.json");
    let spec = dir.path().join("spec.json");
    let out = run(&[
        "symmetrize",
        pattern.to_str().unwrap(),
        "-o",
        spec.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let out = run(&[
        "marginal-check",
        spec.to_str().unwrap(),
        "--level",
        "2",
        "--verify",
    ]);
    assert_exit(&out, 0);
    assert_eq!(stdout_of(&out), "feasible\n");

    // The same spec lies in the solved nearest/next-nearest family.
    let out = run(&["exact", "--case", "d2-nnn", spec.to_str().unwrap()]);
    assert_exit(&out, 0);
    assert_eq!(stdout_of(&out), "verdict true\n");
}

#[test]
fn tiling_search_and_check_agree() {
    let dir = tempfile::tempdir().unwrap();

    // The right-step rule tiles nothing periodic.
    let rule = fixture("right-step-rule.json");
    let out = run(&["tiling-search", rule.to_str().unwrap(), "--max-period", "4"]);
    assert_exit(&out, 1);
    assert!(stdout_of(&out).contains("no periodic tiling up to period 4"));

    // The unequal-neighbour rule has the checkerboard.
    let rule = fixture("unequal-rule.json");
    let witness = dir.path().join("witness.json");
    let out = run(&[
        "tiling-search",
        rule.to_str().unwrap(),
        "--max-period",
        "3",
        "--verify",
        "-o",
        witness.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    assert_eq!(stdout_of(&out).lines().next(), Some("witness 2x2"));
    let out = run(&[
        "tiling-check",
        rule.to_str().unwrap(),
        witness.to_str().unwrap(),
        "--torus",
    ]);
    assert_exit(&out, 0);
    assert_eq!(stdout_of(&out), "valid\n");

    // An open-edge check that fails names the offending pair.
    let rule = fixture("right-step-rule.json");
    let grid = fixture("checkerboard.json");
    let out = run(&["tiling-check", rule.to_str().unwrap(), grid.to_str().unwrap()]);
    assert_exit(&out, 1);
    assert!(stdout_of(&out).starts_with("violation at "));
}

#[test]
fn tiling_reduce_feeds_the_energy_solver() {
    let dir = tempfile::tempdir().unwrap();
    let rule = fixture("right-step-rule.json");
    let ham = dir.path().join("ham.json");
    let out = run(&[
        "tiling-reduce",
        rule.to_str().unwrap(),
        "--form",
        "min",
        "-o",
        ham.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let out = run(&[
        "energy",
        ham.to_str().unwrap(),
        "--level",
        "2",
        "--max-period",
        "2",
        "--verify",
    ]);
    assert_exit(&out, 0);
    let text = stdout_of(&out);
    assert!(text.contains("lower -3/2"), "{text}");
    assert!(text.contains("upper -3/2"), "{text}");
}

#[test]
fn kari_curve_is_deterministic_and_anchored() {
    let a = run(&["kari-curve", "--mu-samples", "4", "--rows", "60"]);
    assert_exit(&a, 0);
    let b = run(&["kari-curve", "--mu-samples", "4", "--rows", "60"]);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout_of(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("mu,omega,eta,omega_sampled,eta_sampled"));
    // The curve starts at the origin, and so does the sampled orbit there.
    assert_eq!(lines.next(), Some("0.2,0,0,0,0"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn reflection_case_accepts_the_uniform_window() {
    let dir = tempfile::tempdir().unwrap();
    let window = dir.path().join("window.json");
    let probs: Vec<String> = (0..16).map(|k| format!("\"{k}\": \"1/16\"")).collect();
    let json = format!(
        "{{\"d\": 2, \"region\": [[0,0],[1,0],[0,1],[1,1]], \"probs\": {{{}}}}}",
        probs.join(", ")
    );
    std::fs::write(&window, json).unwrap();
    let out = run(&["exact", "--case", "reflection", window.to_str().unwrap()]);
    assert_exit(&out, 0);
    assert_eq!(stdout_of(&out), "verdict true\n");
}

#[test]
fn bad_inputs_use_the_input_error_exit_code() {
    let out = run(&["kari-gen", "/nonexistent/system.json"]);
    assert_exit(&out, 2);

    let spec = fixture("disagreement-spec.json");
    let out = run(&["exact", "--case", "bogus", spec.to_str().unwrap()]);
    assert_exit(&out, 2);

    // A malformed rational is named in the error.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"matrix\": [[\"x\",\"0\"],[\"0\",\"1\"]], \"offset\": [\"0\",\"0\"], \"regions\": [[0,0]]}").unwrap();
    let out = run(&["kari-gen", bad.to_str().unwrap()]);
    assert_exit(&out, 2);
}
