use std::path::PathBuf;
use std::process::{Command, Output};

/// Every shipped example with the command(s) that exercise it. The label
/// names the golden file.
pub const CASES: &[(&str, &[&str])] = &[
    ("analyze-rlc", &["analyze", "rlc"]),
    ("analyze-springs", &["analyze", "springs"]),
    ("analyze-double-integrator", &["analyze", "double-integrator"]),
    ("analyze-pendulum", &["analyze", "pendulum"]),
    ("analyze-maxwell-bloch", &["analyze", "maxwell-bloch"]),
    ("analyze-dubins", &["analyze", "dubins"]),
    ("analyze-heisenberg", &["analyze", "heisenberg"]),
    ("analyze-ltv-tabulated", &["analyze", "ltv-tabulated"]),
    ("stabilize-routh", &["stabilize", "--routh", "1,0,1,0,1"]),
    ("stabilize-double-integrator", &["stabilize", "double-integrator"]),
    ("stabilize-pendulum", &["stabilize", "pendulum"]),
    ("stabilize-pendulum-quadruple", &["stabilize", "pendulum", "--poles", "-1,-1,-1,-1"]),
    ("lq-scalar", &["lq", "scalar"]),
    ("lq-double-integrator", &["lq", "double-integrator"]),
    ("shoot-brachistochrone", &["shoot", "brachistochrone", "--x1", "1.0"]),
    ("shoot-zermelo", &["shoot", "zermelo"]),
    ("shoot-predator-prey", &["shoot", "predator-prey"]),
    ("shoot-double-integrator-min-time", &["shoot", "double-integrator-min-time"]),
    ("pde-wave-hum", &["pde", "wave-hum", "--L", "1", "--T", "2", "--N", "8"]),
    ("pde-observe", &["pde", "observe"]),
    ("pde-moment", &["pde", "moment"]),
    ("pde-damping", &["pde", "damping"]),
    ("pde-semilinear-heat", &["pde", "semilinear-heat"]),
];

pub fn ctrl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctrl")).args(args).env_remove("CTRL_OUTPUT_DIR").output().expect("ctrl runs")
}

#[allow(dead_code)] // the acceptance runner does not read goldens
pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}
