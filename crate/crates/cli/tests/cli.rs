use std::path::{Path, PathBuf};
use std::process::Command;

use schroflow::flow::evolve_mode_closed_form;
use schroflow::oscillator::{make_mode, ModeIndex};
use schroflow::quad::RadialQuadrature;
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    dir: TempDir,
}

impl Run {
    fn file(&self, name: &str) -> String {
        std::fs::read_to_string(self.dir.path().join("out").join(name)).unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.file(name)).unwrap()
    }

    /// Data rows of a CSV artifact, provenance and column header removed.
    fn rows(&self, name: &str) -> Vec<Vec<String>> {
        self.file(name)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn schroflow(cmd: &str, config: &str, expect: Option<&str>, extra: &[&str], env: &[(&str, &str)]) -> Run {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "config.json", config);
    let mut c = Command::new(env!("CARGO_BIN_EXE_schroflow"));
    c.arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"));
    if let Some(e) = expect {
        c.arg("--expect").arg(write(dir.path(), "expect.json", e));
    }
    c.args(extra).env_remove("SCHROFLOW_THREADS");
    for (k, v) in env {
        c.env(k, v);
    }
    let out = c.output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        dir,
    }
}

const SINGULAR: &str = r#"{"problem": {"dim": 3, "a": {"constant": -0.1875}}}"#;

#[test]
fn spectrum_classifies_and_signals_hardy() {
    let r = schroflow("spectrum", SINGULAR, None, &[], &[]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("classification: loss_of_decay"));
    assert_eq!(r.rows("spectrum.csv")[0], ["1", "-0.1875", "0.25", "0.25"]);
    let j = r.json("spectrum.json");
    assert_eq!(j["schema_version"], 1);
    assert_eq!(j["provenance"]["config"]["problem"]["k_max"], 16);

    let r = schroflow(
        "spectrum",
        r#"{"problem": {"dim": 3, "a": {"constant": 0}}}"#,
        None,
        &[],
        &[],
    );
    assert_eq!(r.json("spectrum.json")["alpha_1"], 0.0);
    assert!(r.stdout.contains("classical_candidate"));

    let r = schroflow(
        "spectrum",
        r#"{"problem": {"dim": 3, "a": {"constant": -0.25}}}"#,
        None,
        &[],
        &[],
    );
    assert_eq!(r.code, 3);
    assert!(r.stdout.contains("classification: invalid"));
    assert!(r.file("spectrum.csv").contains("-0.25"));
}

#[test]
fn config_errors_exit_2() {
    let bad = [
        r#"{"problem": {"dim": 3, "a": {"constant": 0}}, "surprise": 1}"#,
        r#"{"problem": {"dim": 3, "a": {"constant": 0}, "k_mx": 3}}"#,
        r#"{"problem": {"dim": 3, "a": {"constant": 0}}, "experiment": {"wat": 1}}"#,
        r#"{"problem": {"dim": 3"#,
    ];
    for cfg in bad {
        assert_eq!(schroflow("spectrum", cfg, None, &[], &[]).code, 2, "{cfg}");
    }
    assert_eq!(schroflow("spectrum", SINGULAR, None, &["--threads", "0"], &[]).code, 2);
    assert_eq!(
        schroflow("spectrum", SINGULAR, None, &[], &[("SCHROFLOW_THREADS", "many")]).code,
        2
    );
    // gaussian datum has no closed form unless mu_j = 0
    let r = schroflow(
        "evolve",
        r#"{"problem": {"dim": 3, "a": {"constant": -0.1875}}, "experiment": {"datum": "gaussian"}}"#,
        None,
        &[],
        &[],
    );
    assert_eq!(r.code, 2);
}

#[test]
fn outputs_are_byte_identical_across_thread_counts() {
    let cfg = r#"{"problem": {"dim": 3, "a": {"constant": 2}},
                  "experiment": {"k_start": 2, "l_max": 12, "path": "legendre_collapsed",
                                 "rho": {"lo": 0.0, "hi": 6.0, "points": 40}}}"#;
    let a = schroflow("kernel", cfg, None, &["--threads", "1"], &[]);
    let b = schroflow("kernel", cfg, None, &[], &[("SCHROFLOW_THREADS", "4")]);
    assert_eq!(a.code, 0);
    assert_eq!(a.file("kernel.csv"), b.file("kernel.csv"));
    assert_eq!(a.file("kernel.json"), b.file("kernel.json"));
    let d1 = schroflow("decay", SINGULAR, None, &["--threads", "1"], &[]);
    let d2 = schroflow("decay", SINGULAR, None, &["--threads", "3"], &[]);
    assert_eq!(d1.file("decay.json"), d2.file("decay.json"));
    assert_eq!(d1.file("samples.csv"), d2.file("samples.csv"));
}

#[test]
fn evolve_closed_route_is_the_library_value() {
    let r = schroflow(
        "evolve",
        r#"{"problem": {"dim": 3, "a": {"constant": -0.1875}}, "experiment": {"route": "closed", "times": {"list": [1.0]}}}"#,
        None,
        &[],
        &[],
    );
    assert_eq!(r.code, 0);
    let e = std::sync::Arc::new(schroflow::angular::constant_a_spectrum(3, -0.1875, 16).unwrap());
    let t = schroflow::oscillator::build_table(&e, 3, 16).unwrap();
    let m = make_mode(ModeIndex::new(0, 1), &t, &RadialQuadrature::default()).unwrap();
    let rows = r.rows("profiles.csv");
    assert_eq!(rows.len(), 80);
    for row in rows {
        let u = evolve_mode_closed_form(&m, row[1].parse().unwrap(), 1.0).unwrap();
        assert_eq!(row[3], format!("{:?}", u.re));
        assert_eq!(row[4], format!("{:?}", u.im));
    }
}

#[test]
fn evolve_kernel_and_fd_routes_match_references() {
    let k = schroflow(
        "evolve",
        r#"{"problem": {"dim": 3, "a": {"constant": -0.1875}},
            "experiment": {"route": "kernel", "times": {"list": [0.5, 1.0, 2.0]}}}"#,
        None,
        &[],
        &[],
    );
    assert_eq!(k.code, 0);
    assert!(k.json("evolve.json")["max_reference_rel_l2"].as_f64().unwrap() <= 1e-3);

    let f = schroflow(
        "evolve",
        r#"{"problem": {"dim": 3, "a": {"constant": 0}},
            "experiment": {"route": "fd", "datum": "gaussian", "times": {"list": [0.5, 1.0]},
                           "fd": {"r_max": 30.0, "cells": 6000, "dt": 1e-3}}}"#,
        Some(r#"{"max_reference_rel_l2": {"value": 0.0, "tol": 1e-3}}"#),
        &[],
        &[],
    );
    assert_eq!(f.code, 0, "{}", f.file("evolve.json"));
}

#[test]
fn decay_slopes_and_expectations() {
    let tail = r#"{"problem": {"dim": 3, "a": {"constant": -0.1875}},
                   "experiment": {"weight": 0.25, "times": {"dyadic": [5, 10]}}}"#;
    let r = schroflow("decay", tail, Some(r#"{"fitted_slope": {"tol": 0.02}}"#), &[], &[]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json("decay.json")["theory"]["fitted_slope"], -1.25);
    assert_eq!(r.rows("samples.csv").len(), 6);

    // over 2^0..2^10 the (1+t^2)^p profile fits -1.2125: an honest miss
    let full = schroflow("decay", SINGULAR, Some(r#"{"fitted_slope": {"tol": 0.02}}"#), &[], &[]);
    assert_eq!(full.code, 4);
    assert!((full.json("decay.json")["fitted_slope"].as_f64().unwrap() + 1.2125).abs() < 1e-3);

    let repulsive = r#"{"problem": {"dim": 3, "a": {"constant": 2}},
                        "experiment": {"weight": -1.0, "times": {"dyadic": [5, 10]}}}"#;
    let r = schroflow(
        "decay",
        repulsive,
        Some(r#"{"fitted_slope": {"value": -2.5, "tol": 0.02}}"#),
        &[],
        &[],
    );
    assert_eq!(r.code, 0);

    let synth = r#"{"problem": {"dim": 3, "a": {"constant": 0}},
                    "experiment": {"synthetic": {"exponent": -1.5}}}"#;
    let r = schroflow(
        "decay",
        synth,
        Some(r#"{"fitted_slope": {"value": -1.5, "tol": 1e-12}, "r_squared": {"value": 1.0, "tol": 1e-12}}"#),
        &[],
        &[],
    );
    assert_eq!(r.code, 0);
}

#[test]
fn kernel_sweeps() {
    let free = r#"{"problem": {"dim": 3, "a": {"constant": 0}},
                   "experiment": {"l_max": 40, "path": "legendre_collapsed",
                                  "rho": {"lo": 0.0, "hi": 10.0, "points": 50}}}"#;
    let r = schroflow("kernel", free, None, &[], &[]);
    assert_eq!(r.code, 0);
    for row in r.rows("kernel.csv") {
        let s: f64 = row[5].parse().unwrap();
        assert!((s - 1.0).abs() <= 1e-5, "{row:?}");
        assert_eq!(row[7], "0");
    }

    let tail = r#"{"problem": {"dim": 3, "a": {"constant": 2}},
                   "experiment": {"k_start": 2, "l_max": 40, "rho": {"lo": 0.0, "hi": 10.0, "points": 50}}}"#;
    let r = schroflow("kernel", tail, None, &[], &[]);
    assert_eq!(r.code, 0);
    let wmax = r.json("kernel.json")["max_weighted_modulus"].as_f64().unwrap();
    assert!(wmax.is_finite() && wmax < 1.0);

    let empty = r#"{"problem": {"dim": 3, "a": {"constant": 0}},
                    "experiment": {"rho": {"lo": 0.0, "hi": 10.0, "points": 0}}}"#;
    assert_eq!(schroflow("kernel", empty, None, &[], &[]).code, 2);
}

#[test]
fn heat_residual_and_exponents() {
    let r = schroflow(
        "heat",
        SINGULAR,
        Some(r#"{"relative_residual": {"value": 0.0, "tol": 1e-4}, "time_exponent": {"tol": 0.02}}"#),
        &[],
        &[],
    );
    assert_eq!(r.code, 0);
    assert_eq!(r.json("residual.json")["theory"]["time_exponent"], -1.25);

    let free = schroflow(
        "heat",
        r#"{"problem": {"dim": 3, "a": {"constant": 0}}}"#,
        None,
        &[],
        &[],
    );
    assert!(free.json("residual.json")["free_profile_rel_diff"].as_f64().unwrap() <= 1e-10);

    let k3 = schroflow(
        "heat",
        r#"{"problem": {"dim": 3, "a": {"constant": -0.1875}}, "experiment": {"k": 3, "fd": {}}}"#,
        Some(r#"{"time_exponent": {"tol": 0.02}, "fd_rel_l2": {"value": 0.0, "tol": 1e-3}}"#),
        &[],
        &[],
    );
    assert_eq!(k3.code, 0, "{}", k3.file("residual.json"));
}

#[test]
fn compare_three_routes() {
    let r = schroflow(
        "compare",
        SINGULAR,
        Some(r#"{"max_l2_rel": {"value": 0.0, "tol": 1e-3}}"#),
        &[],
        &[],
    );
    assert_eq!(r.code, 0);
    let j = r.json("compare.json");
    assert_eq!(j["pairs"].as_array().unwrap().len(), 3);
    assert!(j["failures"].as_array().unwrap().is_empty());
    assert!(!r.file("compare.json").contains("runtime"));
}
