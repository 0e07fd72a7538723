//! End-to-end checks of the binary: exit codes, emitted files, and
//! byte-identical report bodies across reruns.

use assert_cmd::Command;
use predicates::prelude::*;

const HEAT: &str = r#"
seed = 0

[nfunction]
dim = 1
catalog = { catalog = "power_p", p = 2.0, scale = 1.0 }

[operator]
dim = 1
rule = { rule = "power_p", p = 2.0 }

[problem]
dim = 1
domain_len = [1.0, 1.0]
cells = [32, 32]
t_end = 0.05
steps = 20
u0 = { kind = "sine_mode", amp = 1.0, mode = 1 }
f = { kind = "zero" }

[solver]
tol = 1e-10
theta = 0.0
n = 100.0
"#;

fn orlicz() -> Command {
    Command::cargo_bin("orlicz").unwrap()
}

#[test]
fn solve_succeeds_and_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("heat.toml");
    std::fs::write(&cfg, HEAT).unwrap();
    let out = dir.path().join("out");

    orlicz()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .assert()
        .success()
        .stdout(predicate::str::contains("pass"));

    for file in ["solution.csv", "energy_residual.csv", "solve_run.csv", "manifest.csv"] {
        assert!(out.join(file).is_file(), "missing {file}");
    }
    let first_solution = std::fs::read(out.join("solution.csv")).unwrap();
    let first_energy = std::fs::read(out.join("energy_residual.csv")).unwrap();

    orlicz()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .assert()
        .success();
    assert_eq!(first_solution, std::fs::read(out.join("solution.csv")).unwrap());
    assert_eq!(first_energy, std::fs::read(out.join("energy_residual.csv")).unwrap());
}

#[test]
fn solution_csv_has_time_space_value_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("heat.toml");
    std::fs::write(&cfg, HEAT).unwrap();
    let out = dir.path().join("out");
    orlicz()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .assert()
        .success();
    let body = std::fs::read_to_string(out.join("solution.csv")).unwrap();
    assert!(body.starts_with("t,x1,u\n"));
    assert!(!body.contains('\r'));
}

#[test]
fn failing_operator_check_exits_one() {
    // The zero field has no coercivity lower bound, so the check must fail.
    let cfg_text = r#"
[nfunction]
dim = 1
catalog = { catalog = "power_p", p = 2.0, scale = 1.0 }

[operator]
dim = 1
rule = { rule = "zero" }
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.toml");
    std::fs::write(&cfg, cfg_text).unwrap();
    orlicz()
        .args(["check-operator", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .assert()
        .code(1)
        .stdout(predicate::str::contains("fail"));
}

#[test]
fn malformed_config_exits_two_with_line_anchor() {
    let cfg_text = "[problem]\ndim = 1\n"; // missing required problem fields
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, cfg_text).unwrap();
    orlicz()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .assert()
        .code(2)
        .stderr(
            predicate::str::contains("configuration error")
                .and(predicate::str::contains("line")),
        );
}

#[test]
fn missing_config_file_exits_two() {
    orlicz()
        .args(["solve", "--config", "/nonexistent/nope.toml"])
        .assert()
        .code(2)
        .stderr(predicate::str::contains("configuration error"));
}

#[test]
fn check_nfunction_passes_for_power_catalog() {
    let cfg_text = r#"
[nfunction]
dim = 1
catalog = { catalog = "power_p", p = 3.0, scale = 1.0 }
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("nf.toml");
    std::fs::write(&cfg, cfg_text).unwrap();
    let out = dir.path().join("out");
    orlicz()
        .args(["check-nfunction", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .assert()
        .success();
    assert!(out.join("manifest.csv").is_file());
    let manifest = std::fs::read_to_string(out.join("manifest.csv")).unwrap();
    assert!(manifest.contains("command,check-nfunction"));
    assert!(manifest.contains("config_digest,"));
}
