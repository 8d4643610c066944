use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use smb_lab::compare::compare;
use smb_lab::report::ReportEnvelope;

const MARKOV: &str = r#"{"type": "markov", "P": [[0.9, 0.1], [0.2, 0.8]]}"#;
const FAIR_COIN: &str = r#"{"type": "bernoulli", "weights": [0.5, 0.5]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smb-lab"))
}

struct Workdir {
    dir: TempDir,
}

impl Workdir {
    fn new() -> Self {
        let w = Self {
            dir: TempDir::new().unwrap(),
        };
        w.file("markov.json", MARKOV);
        w.file("coin.json", FAIR_COIN);
        w
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn config(&self, name: &str, spec: &str, command: &str, params: &str, out: &str) -> PathBuf {
        self.file(
            name,
            &format!(
                r#"{{"spec_path": "{spec}", "command": "{command}", "parameters": {params}, "output_dir": "{out}"}}"#
            ),
        )
    }

    fn run(&self, config: &Path) -> Output {
        bin().arg("run").arg(config).output().unwrap()
    }

    fn report(&self, out: &str, experiment: &str) -> ReportEnvelope {
        ReportEnvelope::load(&self.path(out).join(format!("{experiment}.json"))).unwrap()
    }
}

#[test]
fn entropy_of_fair_coin_is_log_two() {
    let w = Workdir::new();
    let c = w.config(
        "c.json",
        "coin.json",
        "entropy",
        r#"{"seed": 3, "n_grid": [1, 2, 3]}"#,
        "out",
    );
    let out = w.run(&c);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["experiment"], "entropy");
    assert_eq!(summary["pass"], true);

    let r = w.report("out", "entropy");
    let h = r.columns.iter().position(|c| c == "h").unwrap();
    for row in &r.rows {
        assert!((row[h].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }
    let csv = std::fs::read_to_string(w.path("out").join("entropy.csv")).unwrap();
    assert!(csv.starts_with("n,H_n,H_closed,H_n_over_n,h\n"));
    assert!(csv.contains("6.9314718055994529e-1"));
}

#[test]
fn mixing_beta_column_matches_closed_form() {
    let w = Workdir::new();
    let c = w.config(
        "c.json",
        "markov.json",
        "mixing",
        r#"{"seed": 1, "delta_grid": [1, 2, 3, 4, 5, 6]}"#,
        "out",
    );
    assert_eq!(w.run(&c).status.code(), Some(0));
    let r = w.report("out", "mixing");
    let (p0, p1) = (2.0 / 3.0, 1.0 / 3.0);
    for row in &r.rows {
        let gap = row[0].as_f64().unwrap();
        let expected = 4.0 * p0 * p1 * 0.7f64.powf(gap + 1.0);
        assert!((row[1].as_f64().unwrap() - expected).abs() < 1e-12, "gap {gap}");
    }
}

#[test]
fn clt_below_minimum_samples_is_config_error() {
    let w = Workdir::new();
    let c = w.config(
        "c.json",
        "markov.json",
        "clt",
        r#"{"seed": 1, "n": 50, "samples": 10}"#,
        "out",
    );
    let out = w.run(&c);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));
}

#[test]
fn missing_seed_and_bad_spec_exit_three() {
    let w = Workdir::new();
    let c = w.config("a.json", "markov.json", "entropy", "{}", "out");
    assert_eq!(w.run(&c).status.code(), Some(3));

    w.file("bad.json", r#"{"type": "bernoulli", "weights": [0.5, 0.6]}"#);
    let c = w.config("b.json", "bad.json", "entropy", r#"{"seed": 1}"#, "out");
    let out = w.run(&c);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spec error"));

    let out = bin().arg("validate").arg(w.path("bad.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn budget_overrun_is_computation_error() {
    let w = Workdir::new();
    let c = w.config(
        "c.json",
        "markov.json",
        "entropy",
        r#"{"seed": 1, "n_grid": [30], "budget": 1000}"#,
        "out",
    );
    assert_eq!(w.run(&c).status.code(), Some(2));
}

#[test]
fn seed_and_output_overrides() {
    let w = Workdir::new();
    let c = w.config(
        "c.json",
        "markov.json",
        "smb-path",
        r#"{"seed": 1, "n": 5000, "threshold": 0.1}"#,
        "out",
    );
    let out = bin()
        .args(["run", c.to_str().unwrap(), "--seed", "99", "--output-dir"])
        .arg(w.path("elsewhere"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = w.report("elsewhere", "smb-path");
    assert_eq!(r.summary.seed, 99);
    assert!(!w.path("out").exists());
}

#[test]
fn validate_prints_normalized_spec() {
    let w = Workdir::new();
    let out = bin().arg("validate").arg(w.path("markov.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = v["stationary"].as_array().unwrap();
    assert!((p[0].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((v["entropy_rate"].as_f64().unwrap() - 0.383523).abs() < 1e-6);
}

#[test]
fn compare_identical_bruteforce_and_mismatched() {
    let w = Workdir::new();
    let grid = r#""delta_grid": [0, 1, 2, 3, 4, 5, 6]"#;
    let a = w.config(
        "a.json",
        "markov.json",
        "mixing",
        &format!(r#"{{"seed": 1, {grid}}}"#),
        "closed",
    );
    let b = w.config(
        "b.json",
        "markov.json",
        "mixing",
        &format!(r#"{{"seed": 1, "method": "bruteforce", "n": 3, "m": 2, {grid}}}"#),
        "brute",
    );
    let e = w.config("e.json", "markov.json", "entropy", r#"{"seed": 1}"#, "ent");
    for c in [&a, &b, &e] {
        assert_eq!(w.run(c).status.code(), Some(0));
    }
    let closed = w.report("closed", "mixing");
    let brute = w.report("brute", "mixing");

    let same = compare(&closed, &closed, 0.0).unwrap();
    assert!(same.differing_columns.is_empty());
    assert!(same.within_tolerance);

    let d = compare(&closed, &brute, 1e-12).unwrap();
    assert!(d.max_deviation.values().all(|&x| x < 1e-12), "{:?}", d.max_deviation);

    let mismatch = compare(&closed, &w.report("ent", "entropy"), 1e-12);
    assert!(matches!(mismatch, Err(smb_lab::CliError::SchemaMismatch(_))));

    let out = bin()
        .arg("compare")
        .arg(w.path("closed/mixing.json"))
        .arg(w.path("ent/entropy.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn every_command_writes_finite_rows() {
    let w = Workdir::new();
    let cases = [
        ("variance", r#"{"seed": 5, "n": 10, "n_grid": [50], "samples": 500}"#),
        ("moments", r#"{"seed": 5, "n_grid": [2, 4, 6], "q": 4}"#),
        ("clt", r#"{"seed": 5, "n": 100, "samples": 200, "threshold": 0.2}"#),
        ("recurrence", r#"{"seed": 5, "n": 8, "samples": 50}"#),
        ("blocks", r#"{"seed": 5, "n_grid": [1000, 4000], "samples": 5}"#),
    ];
    for (i, (cmd, params)) in cases.iter().enumerate() {
        let c = w.config(&format!("c{i}.json"), "markov.json", cmd, params, "out");
        let out = w.run(&c);
        assert!(
            matches!(out.status.code(), Some(0 | 1)),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let r = w.report("out", cmd);
        assert!(!r.rows.is_empty(), "{cmd}");
        for row in &r.rows {
            assert_eq!(row.len(), r.columns.len());
            assert!(row.iter().all(|c| c.as_f64().is_none_or(f64::is_finite)), "{cmd}");
        }
        let csv = std::fs::read_to_string(w.path("out").join(format!("{cmd}.csv"))).unwrap();
        assert!(!csv.contains("NaN") && !csv.contains("inf"), "{cmd}");
    }
}
