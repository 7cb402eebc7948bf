use std::f64::consts::PI;
use std::sync::Arc;

use ctrlkit::lincontrol::{
    controllable_decomposition, gramian, hautus_test, hum_control_finite, larc_rank, ltv_kalman_test, kalman_test, DerivativePolicy,
    GramianReport, LinearDynamics, LtiSystem,
};
use ctrlkit::numcore::{integrate, Complex, Matrix, OdeProblem, Vector};
use ctrlkit::optctrl::{check_extremal, lq_closed_loop_cost, lq_feedback, pmp_shoot, riccati_solve, LqProblem, ShootOptions};
use ctrlkit::specpde::{
    boundary_observability_constant, damping_decay_experiment, hum_wave_boundary, moment_heat_control, semilinear_stabilize,
    sin2_lower_bound, sin2_mass, DampingOptions, IntervalUnion, SemilinearPlant, SineBasis, WaveHumOptions, WaveState,
};
use ctrlkit::stabilize::{hurwitz, pole_place_roots, routh, PolyCoeffs};
use serde_json::{json, Map, Value};

use crate::spec::{parse_complex, parse_list, PoleEntry, Scenario, SpecFile};
use crate::systems::{build, params_of, to_matrix, Model};
use crate::CliError;

#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub tol: Option<f64>,
    pub steps: Option<usize>,
    pub poles: Option<String>,
    pub routh: Option<String>,
    pub horizon: Option<f64>,
    pub length: Option<f64>,
    pub modes: Option<usize>,
    pub guess: Option<String>,
    pub tf: Option<f64>,
}

/// Plot-ready samples, one row per time node.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub struct Outcome {
    pub results: Map<String, Value>,
    pub diagnostics: Map<String, Value>,
    pub table: Option<Table>,
}

impl Outcome {
    fn new() -> Self {
        Self { results: Map::new(), diagnostics: Map::new(), table: None }
    }

    fn put(&mut self, key: &str, v: Value) {
        self.results.insert(key.into(), v);
    }

    fn diag(&mut self, key: &str, v: Value) {
        self.diagnostics.insert(key.into(), v);
    }
}

fn mat(m: &Matrix) -> Value {
    Value::Array(m.row_iter().map(|r| json!(r.iter().copied().collect::<Vec<f64>>())).collect())
}

fn vecv(v: &Vector) -> Value {
    json!(v.as_slice())
}

fn cplx(zs: &[Complex]) -> Value {
    // sorted so the report does not depend on eigensolver ordering
    let mut zs = zs.to_vec();
    zs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Value::Array(zs.iter().map(|z| json!([z.re, z.im])).collect())
}

fn names(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

fn gramian_json(g: &GramianReport) -> Value {
    json!({ "matrix": mat(&g.matrix), "eigenvalues": g.eigenvalues, "c_t": g.c_t, "invertible": g.invertible })
}

fn positive(x: f64, what: &str) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Input(format!("{what} must be positive, got {x}")))
    }
}

fn even_steps(steps: usize) -> usize {
    steps + steps % 2
}

fn lti_only(model: Model, command: &str) -> Result<(LtiSystem, Option<String>), CliError> {
    match model {
        Model::Lti { sys, origin } => Ok((sys, origin)),
        _ => Err(CliError::Input(format!("`{command}` needs a time-invariant linear system"))),
    }
}

pub fn analyze(spec: &SpecFile, flags: &Flags) -> Result<Outcome, CliError> {
    let tol = flags.tol.unwrap_or(1e-9);
    let steps = even_steps(flags.steps.unwrap_or(2000));
    let horizon = positive(flags.horizon.or(spec.analyze.horizon).unwrap_or(1.0), "horizon")?;
    let mut out = Outcome::new();
    out.diag("tol", json!(tol));
    match build(spec)? {
        Model::Lti { sys, origin } => {
            out.diag("steps", json!(steps));
            out.diag("horizon", json!(horizon));
            if let Some(o) = origin {
                out.put("linearization", json!({ "origin": o, "a": mat(&sys.a), "b": mat(&sys.b) }));
            }
            let k = kalman_test(&sys, tol)?;
            let h = hautus_test(&sys, tol)?;
            let d = controllable_decomposition(&sys, tol)?;
            out.put("controllable", json!(k.controllable));
            out.put("kalman", json!({ "rank": k.rank, "controllable": k.controllable, "singular_values": k.singular_values }));
            let mut eig: Vec<_> = h.eigen_ranks.iter().map(|(z, r)| (*z, *r)).collect();
            eig.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
            out.put(
                "hautus",
                json!({
                    "controllable": h.controllable,
                    "eigen_ranks": eig.iter().map(|(z, r)| json!({ "re": z.re, "im": z.im, "rank": r })).collect::<Vec<_>>(),
                }),
            );
            out.put("decomposition", json!({ "rank": d.rank, "a1": mat(&d.a1), "a2": mat(&d.a2), "a3": mat(&d.a3), "b1": mat(&d.b1) }));
            out.diag("decomposition_residual", json!(d.residual));
            let g = gramian(&sys, horizon, steps)?;
            out.put("gramian", gramian_json(&g));
            if let (Some(x0), Some(x1)) = (&spec.analyze.x0, &spec.analyze.x1) {
                let (x0, x1) = (Vector::from_vec(x0.clone()), Vector::from_vec(x1.clone()));
                if x0.len() != sys.state_dim() || x1.len() != sys.state_dim() {
                    return Err(CliError::Input(format!("analyze.x0 and analyze.x1 need {} entries", sys.state_dim())));
                }
                let hum = hum_control_finite(&sys, horizon, &x0, &x1, steps)?;
                out.put(
                    "steering",
                    json!({
                        "psi": vecv(&hum.psi),
                        "cost": hum.cost,
                        "energy": hum.energy,
                        "endpoint": vecv(&hum.endpoint),
                        "endpoint_error": hum.endpoint_error,
                    }),
                );
                let m = sys.input_dim();
                let grid = ctrlkit::numcore::uniform_grid(0.0, horizon, steps);
                out.table = Some(Table {
                    columns: std::iter::once("t".to_string()).chain(names("u", m)).collect(),
                    rows: grid.iter().map(|&t| std::iter::once(t).chain(hum.control.eval(t).iter().copied()).collect()).collect(),
                });
            }
        }
        Model::Ltv { sys, times, depth } => {
            out.diag("steps", json!(steps));
            out.diag("horizon", json!(horizon));
            out.diag("depth", json!(depth));
            let mut all = true;
            let mut tests = Vec::new();
            for &t in &times {
                let r = ltv_kalman_test(&sys, t, depth, tol, DerivativePolicy::FiniteDifference)?;
                all &= r.satisfied;
                tests.push(json!({ "t": t, "rank": r.rank, "satisfied": r.satisfied }));
            }
            let g = gramian(&sys, horizon, steps)?;
            out.put("ltv_kalman", Value::Array(tests));
            out.put("ltv_satisfied", json!(all));
            out.put("controllable", json!(g.invertible));
            out.put("gramian", gramian_json(&g));
        }
        Model::Brackets { fields, point, depth } => {
            out.diag("depth", json!(depth));
            let r = larc_rank(&fields, &point, depth, tol)?;
            out.put("point", vecv(&point));
            out.put("larc", json!({ "rank": r.rank, "full_rank": r.full_rank, "brackets_evaluated": r.evaluated }));
            out.put("controllable", json!(r.full_rank));
        }
        Model::Oc { .. } | Model::Spectral => {
            return Err(CliError::Input("`analyze` applies to linear systems and bracket-generating fields".into()))
        }
    }
    Ok(out)
}

fn routh_report(coeffs: Vec<f64>, out: &mut Outcome) -> Result<(), CliError> {
    let p = PolyCoeffs::new(coeffs)?;
    let r = routh(&p);
    let h = hurwitz(&p)?;
    let roots = p.roots()?;
    let unstable = roots.iter().filter(|z| z.re >= 0.0).count();
    out.put("polynomial", json!(p.coeffs()));
    out.put("hurwitz", json!(r.hurwitz && h.hurwitz));
    out.put(
        "routh",
        json!({ "table": r.table, "complete": r.complete, "sign_changes": r.sign_changes, "hurwitz": r.hurwitz }),
    );
    out.put("hurwitz_minors", json!({ "minors": h.minors, "hurwitz": h.hurwitz }));
    out.put("roots", cplx(&roots));
    out.diag("closed_right_half_plane_roots", json!(unstable));
    Ok(())
}

pub fn stabilize(spec: Option<&SpecFile>, flags: &Flags) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    let routh_coeffs = match (&flags.routh, spec.and_then(|s| s.stabilize.routh.clone())) {
        (Some(s), _) => Some(parse_list(s)?),
        (None, r) => r,
    };
    if let Some(c) = routh_coeffs {
        routh_report(c, &mut out)?;
        return Ok(out);
    }
    let spec = spec.ok_or_else(|| CliError::Input("`stabilize` needs a spec or --routh".into()))?;
    let (sys, origin) = lti_only(build(spec)?, "stabilize")?;
    let tol = flags.tol.unwrap_or(1e-8);
    let roots: Vec<Complex> = match (&flags.poles, &spec.stabilize.poles) {
        (Some(s), _) => s.split(',').filter(|t| !t.trim().is_empty()).map(parse_complex).collect::<Result<Vec<_>, _>>()?,
        (None, Some(list)) => list
            .iter()
            .map(|e| match e {
                PoleEntry::Real(x) => Ok((*x, 0.0)),
                PoleEntry::Text(s) => parse_complex(s),
            })
            .collect::<Result<Vec<_>, _>>()?,
        (None, None) => return Err(CliError::Input("no target poles: pass --poles or set stabilize.poles".into())),
    }
    .into_iter()
    .map(|(re, im)| Complex::new(re, im))
    .collect();
    if let Some(o) = origin {
        out.put("linearization", json!({ "origin": o, "a": mat(&sys.a), "b": mat(&sys.b) }));
    }
    let gain = pole_place_roots(&sys, &roots, tol)?;
    out.diag("tol", json!(tol));
    out.diag("coefficient_residual", json!(gain.residual));
    out.put("target", cplx(&roots));
    out.put("gain", mat(&gain.k));
    out.put("closed_loop_polynomial", json!(gain.closed_loop_poly));
    out.put("closed_loop_eigenvalues", cplx(&gain.closed_loop_eigenvalues));

    if let Some(x0) = &spec.stabilize.x0 {
        if x0.len() != sys.state_dim() {
            return Err(CliError::Input(format!("stabilize.x0 needs {} entries", sys.state_dim())));
        }
        let horizon = positive(flags.horizon.or(spec.stabilize.horizon).unwrap_or(10.0), "horizon")?;
        let steps = flags.steps.unwrap_or(2000);
        let acl = &sys.a + &sys.b * &gain.k;
        let traj = integrate(&OdeProblem { rhs: |_, x: &Vector| Ok(&acl * x), t0: 0.0, t1: horizon, x0: Vector::from_vec(x0.clone()), steps })?;
        out.diag("steps", json!(steps));
        out.put("final_state", vecv(traj.final_state()));
        out.table = Some(Table {
            columns: std::iter::once("t".to_string()).chain(names("x", sys.state_dim())).chain(names("u", sys.input_dim())).collect(),
            rows: traj
                .times
                .iter()
                .zip(&traj.states)
                .map(|(t, x)| std::iter::once(*t).chain(x.iter().copied()).chain((&gain.k * x).iter().copied()).collect())
                .collect(),
        });
    }
    Ok(out)
}

pub fn lq(spec: &SpecFile, flags: &Flags) -> Result<Outcome, CliError> {
    let (sys, _) = lti_only(build(spec)?, "lq")?;
    let sec = spec.lq.as_ref().ok_or_else(|| CliError::Input("`lq` needs an [lq] table".into()))?;
    let (n, m) = (sys.state_dim(), sys.input_dim());
    let w = sec.w.as_deref().map(|r| to_matrix(r, "lq.w")).transpose()?.unwrap_or_else(|| Matrix::identity(n, n));
    let u = sec.u.as_deref().map(|r| to_matrix(r, "lq.u")).transpose()?.unwrap_or_else(|| Matrix::identity(m, m));
    let q = sec.q.as_deref().map(|r| to_matrix(r, "lq.q")).transpose()?.unwrap_or_else(|| Matrix::zeros(n, n));
    let horizon = positive(flags.horizon.unwrap_or(sec.horizon), "horizon")?;
    if sec.x0.len() != n {
        return Err(CliError::Input(format!("lq.x0 needs {n} entries")));
    }
    let x0 = Vector::from_vec(sec.x0.clone());
    let steps = flags.steps.unwrap_or(2000);
    let sys: Arc<dyn LinearDynamics> = Arc::new(sys);
    let p = LqProblem::constant(sys, w, u, q, horizon)?;
    let sol = Arc::new(riccati_solve(&p, steps)?);
    let e0 = sol.eval(0.0)?;
    let value = -(x0.transpose() * &e0 * &x0)[(0, 0)];
    let run = lq_closed_loop_cost(&p, &lq_feedback(sol, &p), &x0, steps)?;

    let mut out = Outcome::new();
    out.diag("steps", json!(steps));
    out.diag("horizon", json!(horizon));
    out.diag("cost_minus_value", json!(run.cost - value));
    out.put("e0", mat(&e0));
    out.put("value", json!(value));
    out.put("cost", json!(run.cost));
    out.put("final_state", vecv(run.trajectory.final_state()));
    out.table = Some(Table {
        columns: std::iter::once("t".to_string()).chain(names("x", n)).chain(names("u", m)).collect(),
        rows: run
            .trajectory
            .times
            .iter()
            .zip(&run.trajectory.states)
            .zip(&run.controls)
            .map(|((t, x), u)| std::iter::once(*t).chain(x.iter().copied()).chain(u.iter().copied()).collect())
            .collect(),
    });
    Ok(out)
}

pub fn shoot(spec: &SpecFile, flags: &Flags) -> Result<Outcome, CliError> {
    let (problem, mut guess) = match build(spec)? {
        Model::Oc { problem, guess } => (problem, guess),
        _ => return Err(CliError::Input("`shoot` needs an oc-problem spec".into())),
    };
    if let Some(g) = &flags.guess {
        guess.p_init = Vector::from_vec(parse_list(g)?);
    }
    if flags.tf.is_some() {
        guess.tf = flags.tf;
    }
    let mut opts = ShootOptions::default();
    if let Some(s) = flags.steps {
        opts.steps = s;
    }
    if let Some(t) = flags.tol {
        opts.tol = t;
    }
    let e = pmp_shoot(&problem, &guess, &opts)?;
    let d = check_extremal(&e, &problem);

    let mut out = Outcome::new();
    out.diag("steps", json!(opts.steps));
    out.diag("tol", json!(opts.tol));
    out.diag("newton_iterations", json!(e.residual_history.len()));
    out.diag("shooting_residual", json!(e.residual.amax()));
    out.diag("hamiltonian_deviation", json!(d.hamiltonian_deviation));
    out.diag("final_hamiltonian", json!(d.final_hamiltonian));
    out.diag("transversality", json!(d.transversality));
    out.diag("nontriviality", json!(d.nontriviality));
    out.put("tf", json!(e.tf));
    out.put("p0", json!(e.p0));
    out.put("p_initial", vecv(&e.adjoint.states[0]));
    out.put("final_state", vecv(e.state.final_state()));
    out.put("switches", json!(d.switches));
    out.put("singular_arc", json!(d.singular_arc));
    let (n, m) = (problem.n, problem.m);
    out.table = Some(Table {
        columns: std::iter::once("t".to_string()).chain(names("x", n)).chain(names("u", m)).collect(),
        rows: e
            .state
            .times
            .iter()
            .zip(&e.state.states)
            .zip(&e.controls)
            .map(|((t, x), u)| std::iter::once(*t).chain(x.iter().copied()).chain(u.iter().copied()).collect())
            .collect(),
    });
    Ok(out)
}

fn omega_of(length: f64, spec: Option<&Vec<[f64; 2]>>, default: &[(f64, f64)]) -> Result<IntervalUnion, CliError> {
    let iv = spec.map(|v| v.iter().map(|p| (p[0], p[1])).collect()).unwrap_or_else(|| default.to_vec());
    Ok(IntervalUnion::new(length, iv)?)
}

fn coeffs(given: Option<&Vec<f64>>, n: usize, default: impl Fn(usize) -> f64, what: &str) -> Result<Vector, CliError> {
    match given {
        Some(v) if v.len() > n => Err(CliError::Input(format!("{what} has {} entries but only {n} modes", v.len()))),
        Some(v) => Ok(Vector::from_fn(n, |i, _| v.get(i).copied().unwrap_or(0.0))),
        None => Ok(Vector::from_fn(n, |i, _| default(i))),
    }
}

pub fn pde(spec: &SpecFile, flags: &Flags) -> Result<Outcome, CliError> {
    let sec = spec.pde.as_ref().ok_or_else(|| CliError::Input("`pde` needs a spectral-1d spec with a [pde] table".into()))?;
    build(spec)?;
    let params = params_of(spec);
    if sec.scenario != Scenario::Semilinear && !params.is_empty() {
        return Err(CliError::Input("builtin parameters only apply to the semilinear scenario".into()));
    }
    let default_len = if sec.scenario == Scenario::Moment { PI } else { 1.0 };
    let length = positive(flags.length.or(sec.length).unwrap_or(default_len), "length")?;
    let mut out = Outcome::new();
    out.put("scenario", json!(sec.scenario.name()));
    out.diag("length", json!(length));
    match sec.scenario {
        Scenario::WaveHum => {
            let n = flags.modes.or(sec.modes).unwrap_or(8);
            let horizon = positive(flags.horizon.or(sec.horizon).unwrap_or(2.0 * length), "horizon")?;
            let basis = SineBasis::new(length, n)?;
            let y0 = WaveState {
                a: coeffs(sec.y0.as_ref(), n, |i| if i == 0 { 1.0 } else { 0.0 }, "pde.y0")?,
                b: coeffs(sec.y0_velocity.as_ref(), n, |_| 0.0, "pde.y0_velocity")?,
            };
            let opts = WaveHumOptions { steps: even_steps(flags.steps.unwrap_or(4000)), ..Default::default() };
            out.diag("modes", json!(n));
            out.diag("horizon", json!(horizon));
            out.diag("steps", json!(opts.steps));
            let hum = hum_wave_boundary(&basis, &y0, &WaveState::zeros(n), horizon, &opts)?;
            out.diag("gramian_condition", json!(hum.gramian.condition));
            out.diag("gramian_min_singular", json!(hum.gramian.min_singular));
            out.put("endpoint_error", json!(hum.endpoint_error));
            out.put("control_norm_sq", json!(hum.control_norm_sq));
            out.put("gz_z", json!(hum.gz_z));
            out.put("adjoint_a", vecv(&hum.z.a));
            out.put("adjoint_b", vecv(&hum.z.b));
            out.table = Some(Table {
                columns: vec!["t".into(), "u".into()],
                rows: hum.times.iter().zip(&hum.control).map(|(t, u)| vec![*t, *u]).collect(),
            });
        }
        Scenario::Observe => {
            let n = flags.modes.or(sec.modes).unwrap_or(16);
            let horizon = positive(flags.horizon.or(sec.horizon).unwrap_or(2.0 * length), "horizon")?;
            let steps = even_steps(flags.steps.unwrap_or(4000));
            let basis = SineBasis::new(length, n)?;
            out.diag("modes", json!(n));
            out.diag("horizon", json!(horizon));
            out.diag("steps", json!(steps));
            out.put("boundary_observability_constant", json!(boundary_observability_constant(&basis, horizon, steps)?));
            if let Some(w) = sec.omega.as_ref() {
                let omega = omega_of(length, Some(w), &[])?;
                let floor = sin2_lower_bound(length, omega.measure());
                let masses: Vec<f64> = (1..=n).map(|j| sin2_mass(&omega, j)).collect();
                out.put("sin2_lower_bound", json!(floor));
                out.put("sin2_masses", json!(masses));
                out.put("sin2_bound_holds", json!(masses.iter().all(|&m| m >= floor - 1e-14)));
            }
        }
        Scenario::Moment => {
            let n = flags.modes.or(sec.modes).unwrap_or(4);
            let controlled = sec.controlled.unwrap_or(n);
            let horizon = positive(flags.horizon.or(sec.horizon).unwrap_or(1.0), "horizon")?;
            let steps = flags.steps.unwrap_or(4000);
            let x_points = sec.x_points.unwrap_or(65);
            let basis = SineBasis::new(length, n)?;
            let omega = omega_of(length, sec.omega.as_ref(), &[(0.0, PI / 2.0)])?;
            let y0 = coeffs(sec.y0.as_ref(), n, |i| if i == 0 { 1.0 } else { 0.0 }, "pde.y0")?;
            let r = moment_heat_control(&basis, &omega, &y0, horizon, controlled, steps, x_points)?;
            out.diag("modes", json!(n));
            out.diag("controlled", json!(controlled));
            out.diag("horizon", json!(horizon));
            out.diag("steps", json!(steps));
            out.diag("x_points", json!(x_points));
            out.diag("gram_condition", json!(r.family.gram_condition));
            out.put("biorthogonality_residual", json!(r.family.residual()?));
            out.put("final_coefficients", vecv(&r.final_coeffs));
            out.put("max_residual", json!(r.max_residual));
            out.table = Some(Table {
                columns: std::iter::once("t".to_string()).chain(names("U", controlled)).collect(),
                rows: r.times.iter().enumerate().map(|(i, t)| std::iter::once(*t).chain(r.amplitudes.row(i).iter().copied()).collect()).collect(),
            });
        }
        Scenario::Damping => {
            let n = flags.modes.or(sec.modes).unwrap_or(16);
            let horizon = positive(flags.horizon.or(sec.horizon).unwrap_or(10.0), "horizon")?;
            let samples = even_steps(flags.steps.unwrap_or(2000));
            let basis = SineBasis::new(length, n)?;
            let omega = omega_of(length, sec.omega.as_ref(), &[(0.2 * length, 0.8 * length)])?;
            let r = damping_decay_experiment(&basis, &omega, horizon, samples, &DampingOptions::default())?;
            out.diag("modes", json!(n));
            out.diag("horizon", json!(horizon));
            out.diag("samples", json!(samples));
            out.put("delta", json!(r.delta));
            out.put("c1", json!(r.c1));
            out.put("envelope_ratio", json!(r.envelope_ratio()));
            out.put("strictly_decreasing", json!(r.strictly_decreasing()));
            out.put("max_relative_drift", json!(r.max_relative_drift()));
            out.put("observability_value", json!(r.observability_value));
            out.table = Some(Table {
                columns: vec!["t".into(), "energy".into()],
                rows: r.times.iter().zip(&r.energy).map(|(t, e)| vec![*t, *e]).collect(),
            });
        }
        Scenario::Semilinear => semilinear(sec, &params, length, flags, &mut out)?,
    }
    Ok(out)
}

fn semilinear(
    sec: &crate::spec::PdeSection,
    params: &std::collections::BTreeMap<String, f64>,
    length: f64,
    flags: &Flags,
    out: &mut Outcome,
) -> Result<(), CliError> {
    const ALLOWED: [&str; 5] = ["c", "cubic", "n_sim", "gamma", "amplitude"];
    if let Some(k) = params.keys().find(|k| !ALLOWED.contains(&k.as_str())) {
        return Err(CliError::Input(format!("unknown parameter `{k}` for semilinear-heat (allowed: {})", ALLOWED.join(", "))));
    }
    let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    let c = get("c", 15.0);
    let cubic = get("cubic", 0.0);
    let n = flags.modes.or(sec.modes).unwrap_or_else(|| SemilinearPlant::default_modes(length, c));
    let n_sim = get("n_sim", 6.0);
    if n_sim < 1.0 || n_sim.fract() != 0.0 {
        return Err(CliError::Input("n_sim must be a positive integer".into()));
    }
    let n_sim = (n_sim as usize).max(n);
    let horizon = positive(flags.horizon.or(sec.horizon).unwrap_or(10.0), "horizon")?;
    let steps = flags.steps.unwrap_or(2000);
    let mut plant = SemilinearPlant::new(length, c, move |y: f64| c * y - cubic * y * y * y, n, n_sim)?;
    if let Some(g) = params.get("gamma") {
        plant = plant.with_gamma(*g);
    }
    let y0 = coeffs(sec.y0.as_ref(), n_sim, |i| if i == 0 { get("amplitude", 1e-3) } else { 0.0 }, "pde.y0")?;
    let run = semilinear_stabilize(&plant, &y0, horizon, steps)?;

    out.diag("stabilized_modes", json!(n));
    out.diag("simulated_modes", json!(n_sim));
    out.diag("horizon", json!(horizon));
    out.diag("steps", json!(steps));
    out.diag("placement_residual", json!(run.placement_residual));
    out.diag("gamma_min", json!(run.gamma_min));
    out.diag("max_v_increase", json!(run.max_v_increase()));
    let dets: Vec<Value> = (1..=n)
        .map(|k| {
            let (num, formula) = plant.kalman_determinant(k);
            json!({ "n": k, "numeric": num, "formula": formula })
        })
        .collect();
    out.put("kalman_determinants", Value::Array(dets));
    out.put("unstable_modes", json!((1..=n_sim).filter(|&j| plant.lambda(j) >= 0.0).count()));
    out.put("gain", mat(&run.k));
    out.put("lyapunov_p", mat(&run.p));
    out.put("gamma", json!(run.gamma));
    out.put("decay_ratio", json!(run.decay_ratio()));
    out.put("v_non_increasing", json!(run.v_non_increasing()));
    out.put("closed_loop_eigenvalues", cplx(&run.closed_loop_eigenvalues()?));
    out.table = Some(Table {
        columns: ["t".to_string(), "u".to_string()].into_iter().chain(names("z", n_sim)).chain(std::iter::once("V".to_string())).collect(),
        rows: run
            .trajectory
            .times
            .iter()
            .zip(&run.trajectory.states)
            .zip(&run.v)
            .map(|((t, s), v)| std::iter::once(*t).chain(s.iter().copied()).chain(std::iter::once(*v)).collect())
            .collect(),
    });
    Ok(())
}
