//! Acceptance criteria 1–9, driven through the `hjdirac` binary.
//!
//! Every tolerance is pinned here rather than read back from the report, so a
//! loosened default inside a suite cannot make a criterion pass.

use serde_json::Value;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

#[derive(Clone, Copy)]
enum Bound {
    Max(f64),
    Min(f64),
}

struct Pin {
    check: &'static str,
    bound: Bound,
}

const fn max(check: &'static str, v: f64) -> Pin {
    Pin { check, bound: Bound::Max(v) }
}

const fn min(check: &'static str, v: f64) -> Pin {
    Pin { check, bound: Bound::Min(v) }
}

fn run(args: &[&str]) -> (i32, Vec<u8>, Duration) {
    let t = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_hjdirac")).args(args).env_remove("HJDIRAC_THREADS").output().unwrap();
    (o.status.code().unwrap_or(-1), o.stdout, t.elapsed())
}

fn suite(name: &str) -> (i32, Value, Duration) {
    let (code, out, dt) = run(&["verify", "--suite", name]);
    let report = serde_json::from_slice(&out).unwrap_or(Value::Null);
    (code, report, dt)
}

/// Returns the list of problems; empty means the criterion holds.
fn pinned(report: &Value, pins: &[Pin]) -> Vec<String> {
    let checks: Vec<&Value> = report["suites"]
        .as_array()
        .map(|s| s.iter().flat_map(|x| x["checks"].as_array().into_iter().flatten()).collect())
        .unwrap_or_default();
    let mut bad = Vec::new();
    for p in pins {
        let Some(c) = checks.iter().find(|c| c["name"] == p.check) else {
            bad.push(format!("{} missing", p.check));
            continue;
        };
        let r = c["residual"].as_f64().unwrap_or(f64::NAN);
        let ok = match p.bound {
            Bound::Max(t) => r <= t,
            Bound::Min(t) => r >= t,
        };
        if !ok || c["passed"] != true {
            bad.push(format!("{} = {r:e}", p.check));
        }
    }
    bad
}

fn timed(bad: &mut Vec<String>, dt: Duration, limit: f64) {
    if dt.as_secs_f64() >= limit {
        bad.push(format!("runtime {:.2} s ≥ {limit} s", dt.as_secs_f64()));
    }
}

fn suite_criterion(name: &str, pins: &[Pin], limit: Option<f64>) -> Vec<String> {
    let (code, report, dt) = suite(name);
    let mut bad = pinned(&report, pins);
    if code != 0 {
        bad.push(format!("exit {code}"));
    }
    if let Some(l) = limit {
        timed(&mut bad, dt, l);
    }
    bad
}

fn criterion_1() -> Vec<String> {
    suite_criterion(
        "clifford",
        &[
            max("anticommutators", 1e-12),
            max("slash_square", 1e-12),
            max("timelike_spectrum", 1e-10),
            max("timelike_multiplicity", 0.0),
        ],
        Some(1.0),
    )
}

fn criterion_2() -> Vec<String> {
    suite_criterion(
        "hj",
        &[
            max("projectile_loops", 1e-8),
            max("projectile_mass_shell", 1e-8),
            max("curl_green", 0.01),
            min("curl_not_closed", 1.0),
        ],
        Some(5.0),
    )
}

fn criterion_3() -> Vec<String> {
    let mut bad = suite_criterion("hj", &[max("scaling_preserves_exactness", 0.0), max("scaling_loop_ratio", 1e-8)], None);
    bad.extend(suite_criterion(
        "dirac",
        &[max("common_eigenvector", 1e-10), max("non_parallel_rejected", 0.0), max("spin_shift_commutes", 1e-10)],
        None,
    ));
    bad
}

fn criterion_4() -> Vec<String> {
    suite_criterion("dirac", &[max("plane_wave_positive", 1e-10), max("plane_wave_negative", 1e-10)], None)
}

fn criterion_5() -> Vec<String> {
    suite_criterion(
        "dirac",
        &[
            max("lie_geodesic", 1e-6),
            max("dirac_geodesic_failures", 0.0),
            max("shear_detected", 0.0),
            max("mixed_verdicts", 0.0),
        ],
        None,
    )
}

fn criterion_6() -> Vec<String> {
    let mut bad = suite_criterion(
        "dynamics",
        &[
            max("projectile_height", 1e-9),
            min("rk4_ratio_low", 12.0),
            max("rk4_ratio_high", 20.0),
            max("polar_geodesic_straight", 1e-6),
            max("energy_drift", 1e-8),
        ],
        Some(10.0),
    );
    // a step far too coarse for the oracle must be reported as a failure
    let (code, _, _) = run(&["verify", "--suite", "dynamics", "--step", "0.5"]);
    if code != 1 {
        bad.push(format!("coarse step exit {code}, expected 1"));
    }
    bad
}

fn criterion_7() -> Vec<String> {
    suite_criterion(
        "dynamics",
        &[
            max("geodesic_commutator", 1e-12),
            max("parallel_force_commutator", 1e-12),
            min("projectile_commutator", 1e-3),
        ],
        None,
    )
}

fn criterion_8() -> Vec<String> {
    suite_criterion(
        "statmech",
        &[
            max("mb_variance", 3.0),
            max("variance_vs_temperature", 0.02),
            max("bose_count", 0.0),
            max("fermi_count", 0.0),
            max("boltzmann_factorizes", 1e-12),
            max("arrival_rate", 3.0),
        ],
        Some(30.0),
    )
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file() && p.file_name().unwrap() != "config.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_9() -> Vec<String> {
    let simulate = |model: &str| format!(r#"{{"schema_version": 1, "seed": 11, "simulate": {{"model": "{model}", "s_end": 1.0}}}}"#);
    let mut jobs: Vec<(String, Vec<String>, String)> = vec![
        ("verify".into(), vec!["verify".into(), "--samples".into(), "100000".into()], r#"{"schema_version": 1}"#.into()),
        ("verify-csv".into(), vec!["verify".into(), "--suite".into(), "hj".into(), "--format".into(), "csv".into()], r#"{"schema_version": 1}"#.into()),
        (
            "ensemble".into(),
            vec!["ensemble".into(), "--seed".into(), "99".into()],
            r#"{"schema_version": 1, "ensemble": {"n": 50000, "occupancy": {"statistics": "BE", "levels": [0, 0.5, 1], "particles": 3}}}"#.into(),
        ),
        ("ensemble-json".into(), vec!["ensemble".into(), "--format".into(), "json".into()], r#"{"schema_version": 1, "ensemble": {"n": 5000}}"#.into()),
    ];
    for m in ["projectile", "free", "quadratic", "harmonic", "covariant"] {
        jobs.push((format!("simulate-{m}"), vec!["simulate".into()], simulate(m)));
        jobs.push((format!("simulate-{m}-json"), vec!["simulate".into(), "--format".into(), "json".into()], simulate(m)));
    }

    let mut bad = Vec::new();
    for (label, args, cfg) in jobs {
        let mut outputs = Vec::new();
        for threads in ["1", "3"] {
            let dir = tempfile::tempdir().unwrap();
            let cfg_path = dir.path().join("config.json");
            std::fs::write(&cfg_path, &cfg).unwrap();
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_hjdirac"));
            cmd.args(&args).args(["--config", cfg_path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
            let o = cmd.env("HJDIRAC_THREADS", threads).output().unwrap();
            if o.status.code() != Some(0) {
                bad.push(format!("{label}: exit {:?}", o.status.code()));
            }
            outputs.push(snapshot(dir.path()));
        }
        if outputs[0].is_empty() {
            bad.push(format!("{label}: no output files"));
        } else if outputs[0] != outputs[1] {
            bad.push(format!("{label}: outputs differ between runs"));
        }
    }
    bad
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Vec<String>); 9] = [
        ("clifford algebra identities", criterion_1),
        ("exactness and mass shell of the projectile action", criterion_2),
        ("scaling, common eigenvectors, spin shift", criterion_3),
        ("plane-wave Dirac residuals", criterion_4),
        ("Lie transport vs eigen-relation on congruences", criterion_5),
        ("integrators against closed forms", criterion_6),
        ("non-commutativity criterion", criterion_7),
        ("statistical ensembles", criterion_8),
        ("byte-identical reruns", criterion_9),
    ];
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let bad = f();
        // written straight to the stream so the lines survive libtest capture
        let mut err = std::io::stderr().lock();
        if bad.is_empty() {
            writeln!(err, "criterion {}: PASS  {title}", i + 1).unwrap();
        } else {
            failed += 1;
            writeln!(err, "criterion {}: FAIL  {title}: {}", i + 1, bad.join("; ")).unwrap();
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
