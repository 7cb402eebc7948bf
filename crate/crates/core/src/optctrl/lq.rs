use std::sync::Arc;

use crate::control::ControlLaw;
use crate::error::{Error, Result};
use crate::lincontrol::{LinearDynamics, MatrixFn};
use crate::numcore::parallel::try_map_indexed;
use crate::numcore::{rk4_step, simpson, uniform_grid, Execution, Matrix, Trajectory, Vector};
use crate::stabilize::linearize;

const BLOWUP: f64 = 1e8;

/// Minimize `∫ xᵀW x + uᵀU u dt + x(T)ᵀ Q x(T)` subject to `x' = A x + B u`.
#[derive(Clone)]
pub struct LqProblem {
    pub sys: Arc<dyn LinearDynamics>,
    pub w: MatrixFn,
    pub u: MatrixFn,
    pub q: Matrix,
    pub horizon: f64,
}

impl LqProblem {
    pub fn new(sys: Arc<dyn LinearDynamics>, w: MatrixFn, u: MatrixFn, q: Matrix, horizon: f64) -> Result<Self> {
        let (n, m) = (sys.state_dim(), sys.input_dim());
        if !(horizon > 0.0) {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
        }
        if q.shape() != (n, n) || w(0.0).shape() != (n, n) || u(0.0).shape() != (m, m) {
            return Err(Error::Dimension("LQ weight shapes".into()));
        }
        for t in uniform_grid(0.0, horizon, 100) {
            let ut = u(t);
            let min = (&ut + ut.transpose()).scale(0.5).symmetric_eigenvalues().min();
            if !(min > 1e-12) {
                return Err(Error::NotPositiveDefinite(format!("U({t}) has eigenvalue {min:e}")));
            }
        }
        Ok(Self { sys, w, u, q, horizon })
    }

    /// Constant weights.
    pub fn constant(sys: Arc<dyn LinearDynamics>, w: Matrix, u: Matrix, q: Matrix, horizon: f64) -> Result<Self> {
        Self::new(sys, Arc::new(move |_| w.clone()), Arc::new(move |_| u.clone()), q, horizon)
    }

    fn u_inv(&self, t: f64) -> Result<Matrix> {
        (self.u)(t)
            .cholesky()
            .map(|c| c.inverse())
            .ok_or_else(|| Error::NotPositiveDefinite(format!("U({t})")))
    }

    pub fn stage_cost(&self, t: f64, x: &Vector, u: &Vector) -> f64 {
        x.dot(&((self.w)(t) * x)) + u.dot(&((self.u)(t) * u))
    }
}

#[derive(Clone, Debug)]
pub struct RiccatiSolution {
    pub times: Vec<f64>,
    pub e: Vec<Matrix>,
}

impl RiccatiSolution {
    /// Linear interpolation between nodes.
    pub fn eval(&self, t: f64) -> Result<Matrix> {
        let (t0, t1) = (self.times[0], *self.times.last().unwrap());
        let slack = 1e-12 * t1.abs().max(1.0);
        if t < t0 - slack || t > t1 + slack {
            return Err(Error::OutOfRange { t, start: t0, end: t1 });
        }
        let t = t.clamp(t0, t1);
        let i = (self.times.partition_point(|&s| s <= t).max(1) - 1).min(self.times.len() - 2);
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        Ok(&self.e[i] * (1.0 - w) + &self.e[i + 1] * w)
    }
}

/// `Ė = W − AᵀE − EA − E B U⁻¹ Bᵀ E`.
pub fn riccati_rhs(p: &LqProblem, t: f64, e: &Matrix) -> Result<Matrix> {
    let a = p.sys.a(t);
    let b = p.sys.b(t);
    let bub = &b * p.u_inv(t)? * b.transpose();
    Ok((p.w)(t) - a.transpose() * e - e * &a - e * bub * e)
}

fn flat(m: &Matrix) -> Vector {
    Vector::from_column_slice(m.as_slice())
}

fn symmetrize(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

/// Backward RK4 from `E(T) = −Q`.
pub fn riccati_solve(p: &LqProblem, steps: usize) -> Result<RiccatiSolution> {
    if steps == 0 {
        return Err(Error::Grid("at least one step is required".into()));
    }
    let n = p.sys.state_dim();
    let times = uniform_grid(0.0, p.horizon, steps);
    let rhs = |t: f64, v: &Vector| -> Result<Vector> {
        Ok(flat(&riccati_rhs(p, t, &Matrix::from_column_slice(n, n, v.as_slice()))?))
    };
    let mut e = vec![Matrix::zeros(n, n); steps + 1];
    e[steps] = -p.q.clone();
    for i in (0..steps).rev() {
        let next = rk4_step(&rhs, times[i + 1], &flat(&e[i + 1]), times[i] - times[i + 1])?;
        let m = symmetrize(Matrix::from_column_slice(n, n, next.as_slice()));
        if m.norm() > BLOWUP {
            return Err(Error::IntegrationBlowup { time: times[i] });
        }
        e[i] = m;
    }
    Ok(RiccatiSolution { times, e })
}

/// `u = U⁻¹ Bᵀ E x`.
pub fn lq_feedback(sol: Arc<RiccatiSolution>, p: &LqProblem) -> ControlLaw {
    let p = p.clone();
    ControlLaw::feedback(move |t, x| {
        let e = sol.eval(t)?;
        Ok(p.u_inv(t)? * p.sys.b(t).transpose() * e * x)
    })
}

pub type OpenLoop = Arc<dyn Fn(f64) -> Vector + Send + Sync>;

#[derive(Clone, Debug)]
pub struct LqRun {
    pub cost: f64,
    pub trajectory: Trajectory,
    pub controls: Vec<Vector>,
}

fn run_cost(p: &LqProblem, times: &[f64], xs: &[Vector], us: &[Vector]) -> Result<f64> {
    let h = times[1] - times[0];
    let stage: Vec<f64> = times.iter().zip(xs).zip(us).map(|((&t, x), u)| p.stage_cost(t, x, u)).collect();
    let xt = xs.last().unwrap();
    Ok(simpson(&stage, h)? + xt.dot(&(&p.q * xt)))
}

fn simulate(p: &LqProblem, x0: &Vector, steps: usize, control: &dyn Fn(f64, &Vector) -> Result<Vector>) -> Result<LqRun> {
    if steps % 2 == 1 {
        return Err(Error::Grid("cost quadrature needs an even number of steps".into()));
    }
    let times = uniform_grid(0.0, p.horizon, steps);
    let rhs = |t: f64, x: &Vector| -> Result<Vector> {
        let mut dx = p.sys.a(t) * x + p.sys.b(t) * control(t, x)?;
        if let Some(r) = p.sys.drift(t) {
            dx += r;
        }
        Ok(dx)
    };
    let mut xs = vec![x0.clone()];
    for i in 0..steps {
        let next = rk4_step(&rhs, times[i], &xs[i], times[i + 1] - times[i])?;
        xs.push(next);
    }
    let us = times.iter().zip(&xs).map(|(&t, x)| control(t, x)).collect::<Result<Vec<_>>>()?;
    let cost = run_cost(p, &times, &xs, &us)?;
    Ok(LqRun { cost, trajectory: Trajectory { times, states: xs }, controls: us })
}

/// Simulated cost of a feedback law.
pub fn lq_closed_loop_cost(p: &LqProblem, law: &ControlLaw, x0: &Vector, steps: usize) -> Result<LqRun> {
    simulate(p, x0, steps, &|t, x| law.eval(t, x))
}

pub fn open_loop_cost(p: &LqProblem, control: &OpenLoop, x0: &Vector, steps: usize) -> Result<f64> {
    Ok(simulate(p, x0, steps, &|t, _x| Ok(control(t)))?.cost)
}

/// Costs of a family of open-loop controls, evaluated in parallel.
pub fn evaluate_open_loop_costs(p: &LqProblem, family: &[OpenLoop], x0: &Vector, steps: usize, exec: Execution) -> Result<Vec<f64>> {
    try_map_indexed(family.len(), exec, |i| open_loop_cost(p, &family[i], x0, steps))
}

#[derive(Clone, Debug)]
pub struct TrackingSolution {
    pub times: Vec<f64>,
    pub e: Vec<Matrix>,
    pub h: Vec<Vector>,
    /// `u = K(t) (x − ξ(t)) + k(t)`.
    pub law: ControlLaw,
}

fn hermite_mid(p0: &Vector, p1: &Vector, d0: &Vector, d1: &Vector, h: f64) -> (Vector, Vector) {
    let x = (p0 + p1) * 0.5 + (d0 - d1) * (h / 8.0);
    let dx = (p1 - p0) * (1.5 / h) - (d0 + d1) * 0.25;
    (x, dx)
}

/// Tracking feedback along a reference `ξ` sampled on a uniform grid.
pub fn tracking_gains<F>(f: F, xi: &Trajectory, m: usize, w: &Matrix, u: &Matrix, q: &Matrix) -> Result<TrackingSolution>
where
    F: Fn(f64, &Vector, &Vector) -> Vector + Sync,
{
    let steps = xi.len().checked_sub(1).filter(|&s| s >= 2).ok_or_else(|| Error::Grid("reference needs at least 3 samples".into()))?;
    let times = &xi.times;
    let hstep = times[1] - times[0];
    if times.windows(2).any(|s| ((s[1] - s[0]) - hstep).abs() > 1e-9 * hstep.abs()) || !(hstep > 0.0) {
        return Err(Error::Grid("reference grid must be uniform and increasing".into()));
    }
    let n = xi.states[0].len();
    let u_inv = u.clone().cholesky().map(|c| c.inverse()).ok_or_else(|| Error::NotPositiveDefinite("U".into()))?;
    let xs = &xi.states;
    let dxi: Vec<Vector> = (0..=steps)
        .map(|i| match i {
            0 => (xs[1].clone() * 4.0 - &xs[2] - &xs[0] * 3.0) / (2.0 * hstep),
            i if i == steps => (&xs[i] * 3.0 - &xs[i - 1] * 4.0 + &xs[i - 2]) / (2.0 * hstep),
            i => (&xs[i + 1] - &xs[i - 1]) / (2.0 * hstep),
        })
        .collect();
    // Reference data at node i (k = 2i) and midpoint i+1/2 (k = 2i+1).
    let reference = |k: usize| -> (f64, Vector, Vector) {
        if k % 2 == 0 {
            (times[k / 2], xs[k / 2].clone(), dxi[k / 2].clone())
        } else {
            let i = k / 2;
            let (x, dx) = hermite_mid(&xs[i], &xs[i + 1], &dxi[i], &dxi[i + 1], hstep);
            (0.5 * (times[i] + times[i + 1]), x, dx)
        }
    };
    let zero_u = Vector::zeros(m);
    let lin = |k: usize| -> Result<(Matrix, Matrix, Vector)> {
        let (t, x, dx) = reference(k);
        let sys = linearize(|x, u| f(t, x, u), &x, &zero_u, f64::INFINITY)?;
        let r1 = f(t, &x, &zero_u) - dx;
        Ok((sys.a, sys.b, r1))
    };
    let data = (0..=2 * steps).map(lin).collect::<Result<Vec<_>>>()?;
    let nn = n * n;
    // Combined backward state (vec E, h).
    let rhs_at = |k: usize, y: &Vector| -> Vector {
        let (a, b, r1) = &data[k];
        let e = Matrix::from_column_slice(n, n, &y.as_slice()[..nn]);
        let h = y.rows(nn, n).into_owned();
        let bub = b * &u_inv * b.transpose();
        let de = w - a.transpose() * &e - &e * a - &e * &bub * &e;
        let dh = -(a.transpose() * &h) - &e * r1 - &e * &bub * &h;
        let mut out = Vector::zeros(nn + n);
        out.rows_mut(0, nn).copy_from_slice(de.as_slice());
        out.rows_mut(nn, n).copy_from(&dh);
        out
    };
    let mut es = vec![Matrix::zeros(n, n); steps + 1];
    let mut hs = vec![Vector::zeros(n); steps + 1];
    es[steps] = -q.clone();
    let mut y = Vector::zeros(nn + n);
    y.rows_mut(0, nn).copy_from_slice((-q).as_slice());
    for i in (0..steps).rev() {
        let hh = -hstep;
        let k1 = rhs_at(2 * i + 2, &y);
        let k2 = rhs_at(2 * i + 1, &(&y + &k1 * (0.5 * hh)));
        let k3 = rhs_at(2 * i + 1, &(&y + &k2 * (0.5 * hh)));
        let k4 = rhs_at(2 * i, &(&y + &k3 * hh));
        y += (k1 + (k2 + k3) * 2.0 + k4) * (hh / 6.0);
        let e = symmetrize(Matrix::from_column_slice(n, n, &y.as_slice()[..nn]));
        if !(e.norm() <= BLOWUP) {
            return Err(Error::IntegrationBlowup { time: times[i] });
        }
        y.rows_mut(0, nn).copy_from_slice(e.as_slice());
        es[i] = e;
        hs[i] = y.rows(nn, n).into_owned();
    }
    let gains: Vec<Matrix> = (0..=steps).map(|i| &u_inv * data[2 * i].1.transpose() * &es[i]).collect();
    let ff: Vec<Vector> = (0..=steps).map(|i| &u_inv * data[2 * i].1.transpose() * &hs[i]).collect();
    let (t_all, x_all) = (times.clone(), xs.clone());
    let (t0, t1) = (t_all[0], t_all[steps]);
    let law = ControlLaw::feedback(move |t, x| {
        if t < t0 - 1e-12 || t > t1 + 1e-12 {
            return Err(Error::OutOfRange { t, start: t0, end: t1 });
        }
        let s = ((t - t0) / hstep).clamp(0.0, steps as f64);
        let i = (s.floor() as usize).min(steps - 1);
        let wgt = s - i as f64;
        let k = &gains[i] * (1.0 - wgt) + &gains[i + 1] * wgt;
        let kf = &ff[i] * (1.0 - wgt) + &ff[i + 1] * wgt;
        let xr = &x_all[i] * (1.0 - wgt) + &x_all[i + 1] * wgt;
        Ok(k * (x - xr) + kf)
    });
    Ok(TrackingSolution { times: times.clone(), e: es, h: hs, law })
}
