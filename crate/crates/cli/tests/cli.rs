mod common;

use common::{ctrl, golden_dir, CASES};
use serde_json::Value;

fn stdout(args: &[&str]) -> String {
    let out = ctrl(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

/// Structural equality with a loose float comparison, so the goldens
/// survive a different libm; byte identity is checked separately.
fn close(a: &Value, b: &Value, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= 1e-8 * x.abs().max(y.abs()).max(1e-3) {
                Ok(())
            } else {
                Err(format!("{path}: {x} vs {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            x.iter().zip(y).enumerate().try_for_each(|(i, (p, q))| close(p, q, &format!("{path}[{i}]")))
        }
        (Value::Object(x), Value::Object(y)) if x.keys().eq(y.keys()) => {
            x.iter().try_for_each(|(k, v)| close(v, &y[k], &format!("{path}.{k}")))
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} vs {b}")),
    }
}

#[test]
fn golden_reports() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut failures = Vec::new();
    for (label, args) in CASES {
        let got = stdout(args);
        let path = golden_dir().join(format!("{label}.json"));
        if update {
            std::fs::write(&path, &got).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}; run with UPDATE_GOLDEN=1", path.display()));
        if got != want {
            let (g, w): (Value, Value) = (serde_json::from_str(&got).unwrap(), serde_json::from_str(&want).unwrap());
            if let Err(e) = close(&g, &w, label) {
                failures.push(e);
            }
        }
    }
    assert!(failures.is_empty(), "golden mismatches:\n{}", failures.join("\n"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [&["pde", "moment"][..], &["shoot", "zermelo"], &["analyze", "dubins"]] {
        assert_eq!(stdout(args), stdout(args), "{args:?}");
    }
}

#[test]
fn spec_examples() {
    assert_eq!(json(&["analyze", "rlc"])["results"]["controllable"], true);
    assert_eq!(json(&["analyze", "dubins", "--T", "1.5"])["results"]["ltv_satisfied"], true);
    assert_eq!(json(&["stabilize", "--routh", "1,0,1,0,1"])["results"]["hurwitz"], false);

    let r = json(&["stabilize", "double-integrator"]);
    assert_eq!(r["results"]["gain"], serde_json::json!([[-1.0, -2.0]]));

    let tf = json(&["shoot", "brachistochrone", "--x1", "1.0"])["results"]["tf"].as_f64().unwrap();
    let want = (2.0 * std::f64::consts::PI / 9.81).sqrt();
    assert!((tf - want).abs() / want < 1e-4);

    let err = json(&["pde", "wave-hum", "--L", "1", "--T", "2", "--N", "8"])["results"]["endpoint_error"].as_f64().unwrap();
    assert!(err < 1e-6);

    let e0 = json(&["lq", "scalar"])["results"]["e0"][0][0].as_f64().unwrap();
    assert!((e0 + 2.0f64.tanh()).abs() < 1e-8);
}

#[test]
fn quadruple_pole_reports_the_coefficient_residual() {
    let r = json(&["stabilize", "pendulum", "--poles", "-1,-1,-1,-1"]);
    assert!(r["diagnostics"]["coefficient_residual"].as_f64().unwrap() < 1e-8);
    let ev = r["results"]["closed_loop_eigenvalues"].as_array().unwrap();
    assert_eq!(ev.len(), 4);
    let mean: f64 = ev.iter().map(|z| z[0].as_f64().unwrap()).sum::<f64>() / 4.0;
    assert!((mean + 1.0).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "version = 1\nkind = \"lti\"\n[system]\na = [[0.0]]\nb = [[1.0]]\nextra = true\n").unwrap();
    let out = ctrl(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("extra") && msg.contains("line 6"), "{msg}");

    std::fs::write(&bad, "kind = [").unwrap();
    assert_eq!(ctrl(&["analyze", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(ctrl(&["analyze", "no-such-example"]).status.code(), Some(2));
    assert_eq!(ctrl(&["analyze"]).status.code(), Some(2));
    assert_eq!(ctrl(&["stabilize", "pendulum"]).status.code(), Some(0));
    assert_eq!(ctrl(&["shoot", "rlc"]).status.code(), Some(2));
    assert_eq!(ctrl(&["analyze", "rlc", "--param", "q=1"]).status.code(), Some(2));
    // short horizon: the Gramian is numerically singular
    assert_eq!(ctrl(&["pde", "wave-hum", "--T", "1"]).status.code(), Some(3));
    // uncontrollable pair cannot be placed
    let unc = dir.path().join("unc.toml");
    std::fs::write(&unc, "version = 1\nkind = \"lti\"\n[system]\na = [[1.0, 0.0], [0.0, 2.0]]\nb = [[1.0], [0.0]]\n").unwrap();
    assert_eq!(ctrl(&["stabilize", unc.to_str().unwrap(), "--poles", "-1,-2"]).status.code(), Some(3));
    assert_eq!(json(&["analyze", unc.to_str().unwrap()])["results"]["controllable"], false);
}

#[test]
fn csv_output() {
    let text = stdout(&["shoot", "brachistochrone", "--format", "csv"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,u1,u2"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 5);
    // 17 significant digits in scientific notation
    assert!(first.iter().all(|c| c.split('e').next().unwrap().trim_start_matches('-').len() == 18), "{first:?}");
    assert_eq!(ctrl(&["analyze", "rlc", "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_ctrl"))
        .args(["lq", "scalar", "--format", "csv"])
        .env("CTRL_OUTPUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.path().join("scalar.lq.csv")).unwrap();
    assert!(csv.starts_with("t,x1,u1\n"));

    let explicit = dir.path().join("nested").join("r.json");
    assert!(ctrl(&["analyze", "rlc", "--out", explicit.to_str().unwrap()]).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(explicit).unwrap()).unwrap();
    assert_eq!(v["input"]["source"], "builtin:rlc");
    assert_eq!(v["input"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn timing_is_opt_in() {
    assert!(json(&["analyze", "rlc"]).get("timing_ms").is_none());
    assert!(json(&["analyze", "rlc", "--timing"])["timing_ms"].as_f64().is_some());
}
