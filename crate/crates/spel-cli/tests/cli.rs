//! End-to-end tests of the binary: argument handling, exit codes, file
//! formats, and byte-level reproducibility of the outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn spel() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spel"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    spel()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should launch")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("process should exit, not die on a signal")
}

/// Deterministic score file with a clear winner in column 1.
fn write_clear_winner_csv(dir: &Path, n: usize) -> PathBuf {
    let mut doc = String::from("policy_1,policy_2,policy_3\n");
    for i in 0..n {
        // Fixed irrational rotations stand in for noise; no winner ties.
        let t = i as f64;
        let a = 1.0 + (t * 0.7548776662466927).sin();
        let b = 0.2 + (t * 0.5698402909980532).cos() * 0.8;
        let c = (t * 0.3127412938465012).sin();
        doc.push_str(&format!("{a:.9},{b:.9},{c:.9}\n"));
    }
    let path = dir.join("scores.csv");
    std::fs::write(&path, doc).unwrap();
    path
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code_of(&run(&["--help"], dir.path())), 0);
    assert_eq!(code_of(&run(&["--version"], dir.path())), 0);
    assert_eq!(code_of(&run(&["infer", "--help"], dir.path())), 0);
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_clear_winner_csv(dir.path(), 50);
    let csv = csv.to_str().unwrap();

    let out = run(&["frobnicate"], dir.path());
    assert_eq!(code_of(&out), 64);

    let out = run(&["infer", "--scores", csv, "--alpha", "1.5"], dir.path());
    assert_eq!(code_of(&out), 64);
    assert!(stderr_of(&out).contains("alpha"));

    let out = run(&["infer", "--scores", csv, "--method", "bogus"], dir.path());
    assert_eq!(code_of(&out), 64);

    let out = run(&["infer", "--scores", csv, "--boot-draws", "0"], dir.path());
    assert_eq!(code_of(&out), 64);

    let out = run(
        &["simulate", "--experiment", "ties", "--k", "0", "--reps", "1"],
        dir.path(),
    );
    assert_eq!(code_of(&out), 64);
}

#[test]
fn malformed_input_exits_2_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();

    let out = run(&["infer", "--scores", "no-such-file.csv"], dir.path());
    assert_eq!(code_of(&out), 2);

    let bad_header = dir.path().join("bad_header.csv");
    std::fs::write(&bad_header, "policy_1,arm_2\n1.0,2.0\n1.5,0.5\n").unwrap();
    let out = run(&["infer", "--scores", bad_header.to_str().unwrap()], dir.path());
    assert_eq!(code_of(&out), 2);
    assert!(stderr_of(&out).contains("line 1"));

    let bad_field = dir.path().join("bad_field.csv");
    std::fs::write(&bad_field, "policy_1,policy_2\n1.0,2.0\n1.5,abc\n").unwrap();
    let out = run(&["infer", "--scores", bad_field.to_str().unwrap()], dir.path());
    assert_eq!(code_of(&out), 2);
    let err = stderr_of(&out);
    assert!(err.contains("line 3"), "stderr should name line 3: {err}");

    let short_row = dir.path().join("short_row.csv");
    std::fs::write(&short_row, "policy_1,policy_2\n1.0,2.0\n1.5\n").unwrap();
    let out = run(&["infer", "--scores", short_row.to_str().unwrap()], dir.path());
    assert_eq!(code_of(&out), 2);
    assert!(stderr_of(&out).contains("line 3"));

    let nonfinite = dir.path().join("nonfinite.csv");
    std::fs::write(&nonfinite, "policy_1,policy_2\n1.0,inf\n1.5,0.2\n").unwrap();
    let out = run(&["infer", "--scores", nonfinite.to_str().unwrap()], dir.path());
    assert_eq!(code_of(&out), 2);
    assert!(stderr_of(&out).contains("line 2"));

    let one_row = dir.path().join("one_row.csv");
    std::fs::write(&one_row, "policy_1,policy_2\n1.0,2.0\n").unwrap();
    let out = run(&["infer", "--scores", one_row.to_str().unwrap()], dir.path());
    assert_eq!(code_of(&out), 2);
}

#[test]
fn degenerate_covariance_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.csv");
    std::fs::write(&flat, "policy_1,policy_2\n1.0,1.0\n1.0,1.0\n1.0,1.0\n").unwrap();
    let out = run(&["infer", "--scores", flat.to_str().unwrap()], dir.path());
    assert_eq!(code_of(&out), 3);
}

#[test]
fn infer_auto_resolves_to_chi2_on_a_clear_winner() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_clear_winner_csv(dir.path(), 200);
    let out = run(
        &["infer", "--scores", csv.to_str().unwrap(), "--out", "res"],
        dir.path(),
    );
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let doc = std::fs::read_to_string(dir.path().join("res/result.json")).unwrap();
    assert!(doc.contains("\"requested_method\": \"auto\""));
    assert!(doc.contains("\"resolved_method\": \"chi2\""));
    assert!(doc.contains("\"active_set\": [1]"));
    assert!(doc.contains("\"face\": [1]"));
    assert!(doc.contains("\"draw_count\": 0"));
    // The bound must undercut the winning sample mean.
    let lower = json_number(&doc, "lower_bound");
    assert!(lower.is_finite() && lower < 1.0);
}

#[test]
fn infer_reruns_are_byte_identical_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_clear_winner_csv(dir.path(), 120);
    let csv = csv.to_str().unwrap();
    let base = [
        "infer", "--scores", csv, "--method", "corrected", "--boot-draws", "300",
    ];
    for (seed, out_dir) in [("4", "a"), ("4", "b"), ("5", "c")] {
        let mut args: Vec<&str> = base.to_vec();
        args.extend_from_slice(&["--seed", seed, "--out", out_dir]);
        let out = run(&args, dir.path());
        assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    }
    let a = std::fs::read(dir.path().join("a/result.json")).unwrap();
    let b = std::fs::read(dir.path().join("b/result.json")).unwrap();
    let c = std::fs::read(dir.path().join("c/result.json")).unwrap();
    assert_eq!(a, b, "same seed must reproduce the same bytes");
    assert_ne!(a, c, "a different seed must move the bootstrap draws");
}

#[test]
fn forced_bootstrap_method_reports_draw_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_clear_winner_csv(dir.path(), 150);
    let out = run(
        &[
            "infer", "--scores", csv.to_str().unwrap(), "--method", "ordinary",
            "--boot-draws", "250", "--multiplier", "rademacher", "--out", "res",
        ],
        dir.path(),
    );
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let doc = std::fs::read_to_string(dir.path().join("res/result.json")).unwrap();
    assert!(doc.contains("\"resolved_method\": \"ordinary-boot\""));
    assert!(doc.contains("\"draw_count\": 250"));
    assert!(doc.contains("\"multiplier\": \"rademacher\""));
    let crit = json_number(&doc, "critical_value");
    assert!(crit > 0.0);
}

#[test]
fn simulate_writes_one_row_per_cell_and_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "simulate", "--experiment", "dimension", "--n", "150", "--j", "3,5",
            "--reps", "4", "--boot-draws", "60", "--seed", "2", "--out", "sim",
        ],
        dir.path(),
    );
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let doc = std::fs::read_to_string(dir.path().join("sim/results.csv")).unwrap();
    let lines: Vec<&str> = doc.lines().collect();
    assert!(lines[0].starts_with("# config {"));
    assert!(lines[1].starts_with("experiment,n,J,k,rho,method,"));
    // Two cells (J = 3, 5) times five methods.
    assert_eq!(lines.len(), 2 + 2 * 5);
    let methods: Vec<&str> = lines[2..]
        .iter()
        .map(|l| l.split(',').nth(5).unwrap())
        .collect();
    assert_eq!(
        &methods[..5],
        &["auto", "ordinary-boot", "projected-joint", "selected-wald", "fang-santos"]
    );
    for line in &lines[2..7] {
        assert!(line.starts_with("dimension,150,3,1,"));
    }
    for line in &lines[7..] {
        assert!(line.starts_with("dimension,150,5,1,"));
    }
}

#[test]
fn simulate_is_worker_invariant_at_the_byte_level() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "simulate", "--experiment", "ties", "--n", "120", "--j", "4", "--k", "2",
        "--reps", "6", "--boot-draws", "50", "--seed", "31",
    ];
    for (workers, out_dir) in [("1", "w1"), ("4", "w4")] {
        let mut args: Vec<&str> = base.to_vec();
        args.extend_from_slice(&["--workers", workers, "--out", out_dir]);
        let out = run(&args, dir.path());
        assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    }
    let w1 = std::fs::read(dir.path().join("w1/results.csv")).unwrap();
    let w4 = std::fs::read(dir.path().join("w4/results.csv")).unwrap();
    assert_eq!(w1, w4);
}

#[test]
fn timing_reports_both_arms_and_their_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "timing", "--n", "150", "--j", "3", "--boot-draws", "6", "--reps", "1",
            "--out", "t",
        ],
        dir.path(),
    );
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let doc = std::fs::read_to_string(dir.path().join("t/timing.csv")).unwrap();
    let lines: Vec<&str> = doc.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[2].contains(",score-level,"));
    assert!(lines[3].contains(",refit-per-resample,"));
    let ratio: f64 = lines[3].rsplit(',').next().unwrap().parse().unwrap();
    assert!(ratio > 1.0, "refitting nuisances should cost more, got {ratio}");
}

#[test]
fn output_directories_are_created_recursively() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_clear_winner_csv(dir.path(), 60);
    let nested = dir.path().join("deep/nested/out");
    let out = run(
        &[
            "infer", "--scores", csv.to_str().unwrap(), "--out",
            nested.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(nested.join("result.json").is_file());
}

/// Pull a numeric field out of the flat result document.
fn json_number(doc: &str, key: &str) -> f64 {
    let needle = format!("\"{key}\": ");
    let start = doc.find(&needle).unwrap_or_else(|| panic!("missing key {key}")) + needle.len();
    let rest = &doc[start..];
    let end = rest.find([',', '\n']).unwrap();
    rest[..end].trim().parse().unwrap()
}
