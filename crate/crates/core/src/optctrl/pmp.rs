use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numcore::{uniform_grid, Matrix, Trajectory, Vector};

pub type DynFn = Arc<dyn Fn(f64, &Vector, &Vector) -> Vector + Send + Sync>;
pub type RunningCostFn = Arc<dyn Fn(f64, &Vector, &Vector) -> f64 + Send + Sync>;
type StateScalar = Arc<dyn Fn(f64, &Vector) -> f64 + Send + Sync>;
type StateVector = Arc<dyn Fn(f64, &Vector) -> Vector + Send + Sync>;
type StateMatrix = Arc<dyn Fn(f64, &Vector) -> Matrix + Send + Sync>;
type CustomMax = Arc<dyn Fn(f64, &Vector, &Vector, f64) -> Vector + Send + Sync>;
type AdjointFn = Arc<dyn Fn(f64, &Vector, &Vector, f64, &Vector) -> Vector + Send + Sync>;

/// `g(t, x)` with its partial derivatives.
#[derive(Clone)]
pub struct TerminalCost {
    pub value: StateScalar,
    pub dt: StateScalar,
    pub grad_x: StateVector,
}

impl TerminalCost {
    /// `g(t, x) = ⟨c, x⟩`.
    pub fn linear(c: Vector) -> Self {
        let c1 = c.clone();
        Self {
            value: Arc::new(move |_, x| c1.dot(x)),
            dt: Arc::new(|_, _| 0.0),
            grad_x: Arc::new(move |_, _| c.clone()),
        }
    }
}

#[derive(Clone)]
pub enum TerminalCondition {
    Fixed(Vector),
    Free,
    /// `F(x) = 0` with Jacobian rows `∇F_i`.
    Manifold {
        f: Arc<dyn Fn(&Vector) -> Vector + Send + Sync>,
        jacobian: Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    Fixed(f64),
    Free,
}

/// Control-affine structure `f = f_0 + G(t, x) u` and, for the running
/// cost, a part linear in `u` with coefficients `c(t, x)`.
#[derive(Clone)]
pub struct ControlAffine {
    pub g: StateMatrix,
    pub linear_cost: Option<StateVector>,
}

#[derive(Clone)]
pub enum Maximizer {
    /// Running cost contains `½ uᵀ U u`; stationary point `u = U⁻¹ φ / (−p⁰)`.
    Unconstrained { u_weight: Matrix },
    /// Componentwise bang-bang on `[lower, upper]`.
    Box { lower: Vector, upper: Vector },
    Ball { radius: f64 },
    /// `(t, x, p, p⁰) ↦ u`.
    Custom(CustomMax),
}

pub fn hamiltonian_maximizer_box(a: f64, m: usize) -> Maximizer {
    Maximizer::Box { lower: Vector::from_element(m, -a), upper: Vector::from_element(m, a) }
}

pub fn hamiltonian_maximizer_ball(radius: f64) -> Maximizer {
    Maximizer::Ball { radius }
}

pub fn hamiltonian_maximizer_unconstrained(u_weight: Matrix) -> Maximizer {
    Maximizer::Unconstrained { u_weight }
}

const TIE: f64 = 1e-12;

impl Maximizer {
    /// Maximizer of `⟨φ, u⟩ (+ p⁰ ½ uᵀUu)` for the built-in kinds.
    pub fn apply(&self, phi: &Vector, p0: f64) -> Result<Vector> {
        match self {
            Maximizer::Box { lower, upper } => Ok(Vector::from_fn(phi.len(), |i, _| {
                if phi[i] > TIE {
                    upper[i]
                } else if phi[i] < -TIE {
                    lower[i]
                } else {
                    0.5 * (lower[i] + upper[i])
                }
            })),
            Maximizer::Ball { radius } => {
                let nrm = phi.norm();
                Ok(if nrm < TIE { Vector::zeros(phi.len()) } else { phi * (radius / nrm) })
            }
            Maximizer::Unconstrained { u_weight } => {
                if !(p0 < 0.0) {
                    return Err(Error::InvalidInput("unconstrained maximizer needs a normal multiplier p0 < 0".into()));
                }
                let sol = u_weight.clone().lu().solve(phi).ok_or_else(|| Error::Singular("control weight".into()))?;
                Ok(sol / (-p0))
            }
            Maximizer::Custom(_) => Err(Error::InvalidInput("custom maximizers need the full state".into())),
        }
    }
}

#[derive(Clone)]
pub struct OcProblem {
    pub n: usize,
    pub m: usize,
    pub dynamics: DynFn,
    pub running_cost: RunningCostFn,
    pub terminal_cost: Option<TerminalCost>,
    pub x0: Vector,
    pub terminal: TerminalCondition,
    pub horizon: Horizon,
    pub maximizer: Maximizer,
    pub affine: Option<ControlAffine>,
    /// Optional analytic `∂H/∂x (t, x, p, p⁰, u)`.
    pub hamiltonian_dx: Option<AdjointFn>,
    pub autonomous: bool,
}

impl OcProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        x0: Vector,
        m: usize,
        dynamics: DynFn,
        running_cost: RunningCostFn,
        terminal: TerminalCondition,
        horizon: Horizon,
        maximizer: Maximizer,
        affine: Option<ControlAffine>,
    ) -> Result<Self> {
        let n = x0.len();
        let needs_affine = !matches!(maximizer, Maximizer::Custom(_));
        if needs_affine && affine.is_none() {
            return Err(Error::InvalidInput("box, ball and unconstrained maximizers need a control-affine structure".into()));
        }
        match &maximizer {
            Maximizer::Box { lower, upper } if lower.len() != m || upper.len() != m || lower.iter().zip(upper.iter()).any(|(l, u)| l > u) => {
                return Err(Error::InvalidInput("box bounds must have length m and lower <= upper".into()))
            }
            Maximizer::Ball { radius } if !(*radius > 0.0) => return Err(Error::InvalidInput("ball radius must be positive".into())),
            Maximizer::Unconstrained { u_weight } if u_weight.shape() != (m, m) => {
                return Err(Error::Dimension("control weight must be m x m".into()))
            }
            _ => {}
        }
        if let Horizon::Fixed(t) = horizon {
            if !(t > 0.0) {
                return Err(Error::InvalidInput("horizon must be positive".into()));
            }
        }
        if let TerminalCondition::Fixed(x1) = &terminal {
            if x1.len() != n {
                return Err(Error::Dimension("target length".into()));
            }
        }
        let f0 = dynamics(0.0, &x0, &Vector::zeros(m));
        if f0.len() != n {
            return Err(Error::Dimension("dynamics output length".into()));
        }
        Ok(Self {
            n,
            m,
            dynamics,
            running_cost,
            terminal_cost: None,
            x0,
            terminal,
            horizon,
            maximizer,
            affine,
            hamiltonian_dx: None,
            autonomous: true,
        })
    }

    pub fn with_terminal_cost(mut self, g: TerminalCost) -> Self {
        self.terminal_cost = Some(g);
        self
    }

    pub fn with_hamiltonian_dx(mut self, f: AdjointFn) -> Self {
        self.hamiltonian_dx = Some(f);
        self
    }

    pub fn non_autonomous(mut self) -> Self {
        self.autonomous = false;
        self
    }

    pub fn hamiltonian(&self, t: f64, x: &Vector, p: &Vector, p0: f64, u: &Vector) -> f64 {
        p.dot(&(self.dynamics)(t, x, u)) + p0 * (self.running_cost)(t, x, u)
    }

    /// Switching function `Gᵀp + p⁰c` (control-affine problems).
    pub fn switching(&self, t: f64, x: &Vector, p: &Vector, p0: f64) -> Option<Vector> {
        self.affine.as_ref().map(|a| {
            let mut phi = (a.g)(t, x).transpose() * p;
            if let Some(c) = &a.linear_cost {
                phi += c(t, x) * p0;
            }
            phi
        })
    }

    pub fn control(&self, t: f64, x: &Vector, p: &Vector, p0: f64) -> Result<Vector> {
        match &self.maximizer {
            Maximizer::Custom(f) => Ok(f(t, x, p, p0)),
            mx => mx.apply(&self.switching(t, x, p, p0).expect("validated at construction"), p0),
        }
    }

    fn h_dx(&self, t: f64, x: &Vector, p: &Vector, p0: f64, u: &Vector) -> Vector {
        if let Some(f) = &self.hamiltonian_dx {
            return f(t, x, p, p0, u);
        }
        Vector::from_fn(self.n, |i, _| {
            let h = 1e-4 * (1.0 + x[i].abs());
            let at = |d: f64| {
                let mut y = x.clone();
                y[i] += d;
                self.hamiltonian(t, &y, p, p0, u)
            };
            (at(-2.0 * h) - at(2.0 * h) + 8.0 * (at(h) - at(-h))) / (12.0 * h)
        })
    }

    fn terminal_grad(&self, t: f64, x: &Vector) -> (Vector, f64) {
        match &self.terminal_cost {
            Some(g) => ((g.grad_x)(t, x), (g.dt)(t, x)),
            None => (Vector::zeros(self.n), 0.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShootGuess {
    pub p_init: Vector,
    /// Final time guess (free-horizon problems).
    pub tf: Option<f64>,
    /// Solve the abnormal case `p⁰ = 0` with `|p(0)| = 1`.
    pub abnormal: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct ShootOptions {
    pub steps: usize,
    pub newton_iters: usize,
    pub tol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { steps: 2000, newton_iters: 50, tol: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct Extremal {
    pub state: Trajectory,
    pub adjoint: Trajectory,
    pub p0: f64,
    pub tf: f64,
    pub controls: Vec<Vector>,
    pub residual: Vector,
    pub residual_history: Vec<f64>,
    pub hamiltonian_samples: Vec<f64>,
}

struct Flow {
    times: Vec<f64>,
    xs: Vec<Vector>,
    ps: Vec<Vector>,
    us: Vec<Vector>,
}

struct Shooter<'a> {
    prob: &'a OcProblem,
    p0: f64,
    steps: usize,
}

impl Shooter<'_> {
    fn rhs(&self, tf: f64, s: f64, y: &Vector, u: &Vector) -> Vector {
        let n = self.prob.n;
        let t = s * tf;
        let x = y.rows(0, n).into_owned();
        let p = y.rows(n, n).into_owned();
        let dx = (self.prob.dynamics)(t, &x, u) * tf;
        let dp = -self.prob.h_dx(t, &x, &p, self.p0, u) * tf;
        let mut out = Vector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&dx);
        out.rows_mut(n, n).copy_from(&dp);
        out
    }

    fn control_at(&self, tf: f64, s: f64, y: &Vector) -> Result<Vector> {
        let n = self.prob.n;
        self.prob.control(s * tf, &y.rows(0, n).into_owned(), &y.rows(n, n).into_owned(), self.p0)
    }

    fn rk4_frozen(&self, tf: f64, s: f64, y: &Vector, h: f64, u: &Vector) -> Vector {
        let k1 = self.rhs(tf, s, y, u);
        let k2 = self.rhs(tf, s + 0.5 * h, &(y + &k1 * (0.5 * h)), u);
        let k3 = self.rhs(tf, s + 0.5 * h, &(y + &k2 * (0.5 * h)), u);
        let k4 = self.rhs(tf, s + h, &(y + &k3 * h), u);
        y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
    }

    fn rk4_live(&self, tf: f64, s: f64, y: &Vector, h: f64) -> Result<Vector> {
        let k1 = self.rhs(tf, s, y, &self.control_at(tf, s, y)?);
        let y2 = y + &k1 * (0.5 * h);
        let k2 = self.rhs(tf, s + 0.5 * h, &y2, &self.control_at(tf, s + 0.5 * h, &y2)?);
        let y3 = y + &k2 * (0.5 * h);
        let k3 = self.rhs(tf, s + 0.5 * h, &y3, &self.control_at(tf, s + 0.5 * h, &y3)?);
        let y4 = y + &k3 * h;
        let k4 = self.rhs(tf, s + h, &y4, &self.control_at(tf, s + h, &y4)?);
        Ok(y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0))
    }

    /// Bang-bang step: the control is held constant on each sub-interval and
    /// switches are located by bisection so that RK4 never straddles a jump.
    fn step_bang(&self, tf: f64, s: f64, y: &Vector, h: f64, u: Vector, depth: usize) -> Result<Vector> {
        let y1 = self.rk4_frozen(tf, s, y, h, &u);
        if depth == 0 || self.control_at(tf, s + h, &y1)? == u {
            return Ok(y1);
        }
        let (mut lo, mut hi) = (0.0, h);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.control_at(tf, s + mid, &self.rk4_frozen(tf, s, y, mid, &u))? == u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let after = self.control_at(tf, s + hi, &self.rk4_frozen(tf, s, y, hi, &u))?;
        let ylo = self.rk4_frozen(tf, s, y, lo, &u);
        self.step_bang(tf, s + lo, &ylo, h - lo, after, depth - 1)
    }

    fn flow(&self, p_init: &Vector, tf: f64) -> Result<Flow> {
        let n = self.prob.n;
        let grid = uniform_grid(0.0, 1.0, self.steps);
        let mut y = Vector::zeros(2 * n);
        y.rows_mut(0, n).copy_from(&self.prob.x0);
        y.rows_mut(n, n).copy_from(p_init);
        let bang = matches!(self.prob.maximizer, Maximizer::Box { .. });
        let mut ys = vec![y.clone()];
        for i in 0..self.steps {
            let h = grid[i + 1] - grid[i];
            y = if bang {
                let u = self.control_at(tf, grid[i], &y)?;
                self.step_bang(tf, grid[i], &y, h, u, 4)?
            } else {
                self.rk4_live(tf, grid[i], &y, h)?
            };
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::IntegrationBlowup { time: grid[i + 1] * tf });
            }
            ys.push(y.clone());
        }
        let times: Vec<f64> = grid.iter().map(|s| s * tf).collect();
        let us = grid.iter().zip(&ys).map(|(&s, y)| self.control_at(tf, s, y)).collect::<Result<Vec<_>>>()?;
        Ok(Flow {
            times,
            xs: ys.iter().map(|y| y.rows(0, n).into_owned()).collect(),
            ps: ys.iter().map(|y| y.rows(n, n).into_owned()).collect(),
            us,
        })
    }

    fn split(&self, z: &Vector) -> (Vector, f64) {
        let n = self.prob.n;
        let tf = match self.prob.horizon {
            Horizon::Fixed(t) => t,
            Horizon::Free => z[n],
        };
        (z.rows(0, n).into_owned(), tf)
    }

    fn residual_of(&self, flow: &Flow, p_init: &Vector) -> Result<Vector> {
        let prob = self.prob;
        let tf = *flow.times.last().unwrap();
        let x = flow.xs.last().unwrap();
        let p = flow.ps.last().unwrap();
        let (grad_g, dg_dt) = prob.terminal_grad(tf, x);
        let shifted = p - &grad_g * self.p0;
        let mut r: Vec<f64> = Vec::new();
        match &prob.terminal {
            TerminalCondition::Fixed(x1) => r.extend((x - x1).iter()),
            TerminalCondition::Free => r.extend(shifted.iter()),
            TerminalCondition::Manifold { f, jacobian } => {
                r.extend(f(x).iter());
                let jac = jacobian(x);
                let k = jac.nrows();
                // tangent space = orthogonal complement of the gradient rows
                let svd = jac.transpose().svd(true, false);
                let u = svd.u.ok_or_else(|| Error::NoConvergence("tangent basis".into()))?;
                let full = if u.ncols() < prob.n {
                    let mut cols: Vec<Vector> = u.column_iter().map(|c| c.into_owned()).collect();
                    for j in 0..prob.n {
                        let mut e = Vector::zeros(prob.n);
                        e[j] = 1.0;
                        for c in &cols {
                            e -= c * c.dot(&e);
                        }
                        if e.norm() > 1e-8 {
                            cols.push(e.normalize());
                        }
                    }
                    Matrix::from_columns(&cols)
                } else {
                    u
                };
                for j in k..prob.n {
                    r.push(full.column(j).dot(&shifted));
                }
            }
        }
        if prob.horizon == Horizon::Free {
            let u = flow.us.last().unwrap();
            r.push(prob.hamiltonian(tf, x, p, self.p0, u) + self.p0 * dg_dt);
        }
        if self.p0 == 0.0 {
            r.push(p_init.norm_squared() - 1.0);
        }
        Ok(Vector::from_vec(r))
    }

    fn residual(&self, z: &Vector) -> Result<(Vector, Flow)> {
        let (p_init, tf) = self.split(z);
        if !(tf > 0.0) {
            return Err(Error::InvalidInput("final time must stay positive".into()));
        }
        let flow = self.flow(&p_init, tf)?;
        Ok((self.residual_of(&flow, &p_init)?, flow))
    }
}

/// Single shooting with damped Gauss–Newton on the boundary residual.
pub fn pmp_shoot(prob: &OcProblem, guess: &ShootGuess, opts: &ShootOptions) -> Result<Extremal> {
    if guess.p_init.len() != prob.n {
        return Err(Error::Dimension("initial adjoint guess length".into()));
    }
    if opts.steps == 0 {
        return Err(Error::Grid("at least one step is required".into()));
    }
    let p0 = if guess.abnormal { 0.0 } else { -1.0 };
    let sh = Shooter { prob, p0, steps: opts.steps };
    let mut z: Vec<f64> = guess.p_init.iter().copied().collect();
    if prob.horizon == Horizon::Free {
        z.push(guess.tf.ok_or_else(|| Error::InvalidInput("free-time problems need a final time guess".into()))?);
    }
    let mut z = Vector::from_vec(z);
    let (mut r, mut flow) = sh.residual(&z)?;
    let mut history = vec![r.norm()];
    for _ in 0..opts.newton_iters {
        if r.norm() < opts.tol {
            break;
        }
        let mut jac = Matrix::zeros(r.len(), z.len());
        for j in 0..z.len() {
            let d = 1e-6 * (1.0 + z[j].abs());
            let mut zj = z.clone();
            zj[j] += d;
            let (rj, _) = sh.residual(&zj)?;
            jac.set_column(j, &((rj - &r) / d));
        }
        let dz = jac
            .svd(true, true)
            .solve(&(-&r), 1e-14)
            .map_err(|e| Error::NoConvergence(format!("shooting Jacobian: {e}")))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=30 {
            let cand = &z + &dz * lambda;
            if let Ok((rc, fc)) = sh.residual(&cand) {
                if rc.norm() < r.norm() {
                    z = cand;
                    r = rc;
                    flow = fc;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        history.push(r.norm());
        if !accepted {
            break;
        }
    }
    if !(r.norm() < opts.tol) {
        return Err(Error::ShootingFailed { reason: "Newton stagnated".into(), residual: r.norm(), history });
    }
    let (_, tf) = sh.split(&z);
    let hamiltonian_samples = (0..flow.times.len())
        .map(|i| prob.hamiltonian(flow.times[i], &flow.xs[i], &flow.ps[i], p0, &flow.us[i]))
        .collect();
    Ok(Extremal {
        state: Trajectory { times: flow.times.clone(), states: flow.xs },
        adjoint: Trajectory { times: flow.times, states: flow.ps },
        p0,
        tf,
        controls: flow.us,
        residual: r,
        residual_history: history,
        hamiltonian_samples,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalDiagnostics {
    /// `max |H(t_i) − mean H|` (autonomous problems).
    pub hamiltonian_deviation: Option<f64>,
    /// `|H(t_f) + p⁰ ∂g/∂t|` (free final time).
    pub final_hamiltonian: Option<f64>,
    /// Norm of the transversality residual (free or manifold targets).
    pub transversality: Option<f64>,
    pub nontriviality: f64,
    /// Sign changes of the switching function (control-affine problems).
    pub switches: Option<usize>,
    pub singular_arc: bool,
}

pub fn check_extremal(e: &Extremal, prob: &OcProblem) -> ExtremalDiagnostics {
    let hs = &e.hamiltonian_samples;
    let mean = hs.iter().sum::<f64>() / hs.len() as f64;
    let hamiltonian_deviation = prob.autonomous.then(|| hs.iter().fold(0.0f64, |m, h| m.max((h - mean).abs())));
    let x = e.state.final_state();
    let p = e.adjoint.final_state();
    let (grad_g, dg_dt) = prob.terminal_grad(e.tf, x);
    let shifted = p - grad_g * e.p0;
    let transversality = match &prob.terminal {
        TerminalCondition::Fixed(_) => None,
        TerminalCondition::Free => Some(shifted.norm()),
        TerminalCondition::Manifold { jacobian, .. } => {
            let jac = jacobian(x);
            // remove the normal component
            let lam = jac.transpose().svd(true, true).solve(&shifted, 1e-14).ok();
            lam.map(|l| (&shifted - jac.transpose() * l).norm())
        }
    };
    let final_hamiltonian = (prob.horizon == Horizon::Free).then(|| (hs.last().unwrap() + e.p0 * dg_dt).abs());
    let p_init = &e.adjoint.states[0];
    let nontriviality = (p_init.norm_squared() + e.p0 * e.p0).sqrt();
    let phis: Option<Vec<Vector>> = (0..e.state.len())
        .map(|i| prob.switching(e.state.times[i], &e.state.states[i], &e.adjoint.states[i], e.p0))
        .collect();
    let (switches, singular_arc) = match phis {
        Some(phis) => {
            let mut count = 0;
            let mut run = 0usize;
            let mut singular = false;
            for j in 0..prob.m {
                let mut last = 0.0f64;
                for phi in &phis {
                    let v = phi[j];
                    if v.abs() < 1e-9 {
                        run += 1;
                        singular |= run >= 5;
                        continue;
                    }
                    run = 0;
                    if last != 0.0 && v.signum() != last.signum() {
                        count += 1;
                    }
                    last = v;
                }
            }
            (Some(count), singular)
        }
        None => (None, false),
    };
    ExtremalDiagnostics { hamiltonian_deviation, final_hamiltonian, transversality, nontriviality, switches, singular_arc }
}
