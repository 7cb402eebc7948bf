//! Turns a parsed spec into library objects.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ctrlkit::lincontrol::{LtiSystem, LtvSystem, VectorField};
use ctrlkit::numcore::{Matrix, Vector};
use ctrlkit::optctrl::examples::{brachistochrone, double_integrator_min_time, predator_prey, zermelo_min_drift};
use ctrlkit::optctrl::{OcProblem, ShootGuess};
use ctrlkit::stabilize::linearize;

use crate::spec::{Kind, SpecFile};
use crate::CliError;

pub enum Model {
    Lti {
        sys: LtiSystem,
        /// Where the matrices came from, when they are a linearization.
        origin: Option<String>,
    },
    Ltv {
        sys: LtvSystem,
        times: Vec<f64>,
        depth: usize,
    },
    Brackets {
        fields: Vec<VectorField>,
        point: Vector,
        depth: usize,
    },
    Oc {
        problem: OcProblem,
        guess: ShootGuess,
    },
    Spectral,
}

/// Builtin parameters with defaults; anything not listed is rejected.
struct Params<'a> {
    id: &'a str,
    given: &'a BTreeMap<String, f64>,
}

impl<'a> Params<'a> {
    fn check(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.given.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Input(format!("unknown parameter `{k}` for builtin `{}` (allowed: {})", self.id, allowed.join(", ")))),
            None => Ok(()),
        }
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.given.get(key).copied().unwrap_or(default)
    }
}

pub fn to_matrix(rows: &[Vec<f64>], what: &str) -> Result<Matrix, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(CliError::Input(format!("{what}: expected a non-empty rectangular array of rows")));
    }
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn params_of(spec: &SpecFile) -> BTreeMap<String, f64> {
    spec.builtin.as_ref().map(|b| b.params.clone()).unwrap_or_default()
}

pub fn build(spec: &SpecFile) -> Result<Model, CliError> {
    match spec.kind {
        Kind::Lti => {
            let s = spec.system.as_ref().expect("checked by parse");
            let sys = LtiSystem::new(to_matrix(&s.a, "system.a")?, to_matrix(&s.b, "system.b")?)?;
            Ok(Model::Lti { sys, origin: None })
        }
        Kind::LtvTabulated => tabulated(spec),
        Kind::Spectral1d => Ok(Model::Spectral),
        Kind::NonlinearBuiltin | Kind::OcProblem => {
            let b = spec.builtin.as_ref().expect("checked by parse");
            let p = Params { id: &b.id, given: &b.params };
            builtin(spec, &p)
        }
    }
}

fn tabulated(spec: &SpecFile) -> Result<Model, CliError> {
    let t = spec.tabulated.as_ref().expect("checked by parse");
    let k = t.times.len();
    if k < 2 || t.a.len() != k || t.b.len() != k {
        return Err(CliError::Input("tabulated: need at least two times and one A and B per time".into()));
    }
    if t.times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Input("tabulated.times must be strictly increasing".into()));
    }
    let a: Vec<Matrix> = t.a.iter().map(|m| to_matrix(m, "tabulated.a")).collect::<Result<_, _>>()?;
    let b: Vec<Matrix> = t.b.iter().map(|m| to_matrix(m, "tabulated.b")).collect::<Result<_, _>>()?;
    if a.iter().any(|m| m.shape() != a[0].shape()) || b.iter().any(|m| m.shape() != b[0].shape()) {
        return Err(CliError::Input("tabulated: all samples must share one shape".into()));
    }
    let times = t.times.clone();
    let lerp = move |samples: Vec<Matrix>| {
        let times = times.clone();
        move |s: f64| {
            let i = times.partition_point(|&x| x <= s).clamp(1, times.len() - 1);
            let w = ((s - times[i - 1]) / (times[i] - times[i - 1])).clamp(0.0, 1.0);
            &samples[i - 1] * (1.0 - w) + &samples[i] * w
        }
    };
    let sys = LtvSystem::from_fns(lerp(a), lerp(b))?;
    let times = if spec.analyze.ltv_times.is_empty() { vec![t.times[0]] } else { spec.analyze.ltv_times.clone() };
    Ok(Model::Ltv { sys, times, depth: spec.analyze.depth.unwrap_or(2) })
}

fn v(x: &[f64]) -> Vector {
    Vector::from_vec(x.to_vec())
}

fn guess(spec: &SpecFile, p: &[f64], tf: Option<f64>) -> ShootGuess {
    ShootGuess {
        p_init: v(spec.shoot.guess.as_deref().unwrap_or(p)),
        tf: spec.shoot.tf.or(tf),
        abnormal: spec.shoot.abnormal,
    }
}

fn builtin(spec: &SpecFile, p: &Params) -> Result<Model, CliError> {
    let want_kind = match p.id {
        "zermelo" | "brachistochrone" | "predator-prey" | "double-integrator-min-time" => Kind::OcProblem,
        "semilinear-heat" => Kind::Spectral1d,
        _ => Kind::NonlinearBuiltin,
    };
    if want_kind != spec.kind {
        return Err(CliError::Input(format!("builtin `{}` belongs to kind {want_kind:?}, not {:?}", p.id, spec.kind)));
    }
    match p.id {
        "rlc" => {
            p.check(&["r", "l", "c"])?;
            let (r, l, c) = (p.get("r", 1.0), p.get("l", 0.5), p.get("c", 2.0));
            if !(l > 0.0 && c > 0.0) {
                return Err(CliError::Input("rlc: l and c must be positive".into()));
            }
            let sys = LtiSystem::from_rows(&[&[0.0, 1.0], &[-1.0 / (l * c), -r / l]], &[&[0.0], &[1.0]])?;
            Ok(Model::Lti { sys, origin: Some("charge/current form of the series RLC circuit".into()) })
        }
        "pendulum" => {
            p.check(&["m", "big_m", "l", "g"])?;
            let (m, big_m, l, g) = (p.get("m", 0.2), p.get("big_m", 1.0), p.get("l", 0.5), p.get("g", 9.81));
            let f = move |x: &Vector, u: &Vector| {
                let (th, om) = (x[2], x[3]);
                let d = big_m + m * th.sin().powi(2);
                v(&[
                    x[1],
                    (m * l * om * om * th.sin() - m * g * th.cos() * th.sin() + u[0]) / d,
                    om,
                    (-m * l * om * om * th.sin() * th.cos() + (big_m + m) * g * th.sin() - u[0] * th.cos()) / (l * d),
                ])
            };
            let sys = linearize(f, &Vector::zeros(4), &Vector::zeros(1), 1e-12)?;
            Ok(Model::Lti { sys, origin: Some("linearization of the cart-pendulum at the upright rest point".into()) })
        }
        "maxwell-bloch" => {
            p.check(&["a", "b", "c"])?;
            let x = v(&[p.get("a", 0.0), p.get("b", 1.5), p.get("c", 0.7)]);
            let u = v(&[-x[1], -x[0] * x[2]]);
            let f = |x: &Vector, u: &Vector| v(&[x[1] + u[0], x[0] * x[2] + u[1], -x[0] * x[1]]);
            let sys = linearize(f, &x, &u, 1e-10)?;
            Ok(Model::Lti { sys, origin: Some(format!("linearization at ({}, {}, {})", x[0], x[1], x[2])) })
        }
        "dubins" => {
            p.check(&["period"])?;
            let period = p.get("period", 3.0);
            if !(period > 0.0) {
                return Err(CliError::Input("dubins: period must be positive".into()));
            }
            let w = 2.0 * PI / period;
            let sys = LtvSystem::from_fns(
                move |t| Matrix::from_row_slice(3, 3, &[0.0, 0.0, -(w * t).sin(), 0.0, 0.0, (w * t).cos(), 0.0, 0.0, 0.0]),
                |_| Matrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]),
            )?;
            let times = if spec.analyze.ltv_times.is_empty() { vec![0.4] } else { spec.analyze.ltv_times.clone() };
            Ok(Model::Ltv { sys, times, depth: spec.analyze.depth.unwrap_or(3) })
        }
        "heisenberg" => {
            p.check(&[])?;
            let f1 = VectorField::new(|x: &Vector| v(&[1.0, 0.0, -x[1] / 2.0]));
            let f2 = VectorField::new(|x: &Vector| v(&[0.0, 1.0, x[0] / 2.0]));
            let point = v(spec.analyze.point.as_deref().unwrap_or(&[0.3, -0.2, 1.0]));
            if point.len() != 3 {
                return Err(CliError::Input("heisenberg: analyze.point must have 3 entries".into()));
            }
            Ok(Model::Brackets { fields: vec![f1, f2], point, depth: spec.analyze.depth.unwrap_or(2) })
        }
        "zermelo" => {
            p.check(&["v", "ell"])?;
            let problem = zermelo_min_drift(p.get("v", 0.5), p.get("ell", 1.0))?;
            Ok(Model::Oc { problem, guess: guess(spec, &[-1.0, 1.0], Some(1.0)) })
        }
        "brachistochrone" => {
            p.check(&["x1", "g"])?;
            let (x1, g) = (p.get("x1", 1.0), p.get("g", 9.81));
            let problem = brachistochrone(x1, g)?;
            // the guess scales with the target distance like t_f does
            let s = x1.abs().sqrt();
            Ok(Model::Oc { problem, guess: guess(spec, &[0.3 * s, 0.1 * s], Some(0.7 * s)) })
        }
        "predator-prey" => {
            p.check(&["a", "b", "c", "umax", "prey", "predator", "horizon"])?;
            let x0 = v(&[p.get("prey", 4.0), p.get("predator", 0.2)]);
            let problem = predator_prey(p.get("a", 1.0), p.get("b", 1.0), p.get("c", 1.0), p.get("umax", 1.0), x0, p.get("horizon", 2.0))?;
            Ok(Model::Oc { problem, guess: guess(spec, &[-3.0, 5.0], None) })
        }
        "double-integrator-min-time" => {
            p.check(&["x1", "x2"])?;
            let problem = double_integrator_min_time(v(&[p.get("x1", 1.0), p.get("x2", 0.0)]))?;
            Ok(Model::Oc { problem, guess: guess(spec, &[-1.2, -0.9], Some(1.8)) })
        }
        "semilinear-heat" => Ok(Model::Spectral),
        other => Err(CliError::Input(format!("unknown builtin `{other}`"))),
    }
}
