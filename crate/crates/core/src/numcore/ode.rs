use super::{expm, Matrix, Vector};
use crate::error::{Error, Result};
use crate::lincontrol::LinearDynamics;

/// Initial-value problem `x' = rhs(t, x)` on `[t0, t1]` with a fixed number
/// of RK4 steps. `t1 < t0` integrates backwards.
pub struct OdeProblem<F> {
    pub rhs: F,
    pub t0: f64,
    pub t1: f64,
    pub x0: Vector,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
}

impl Trajectory {
    pub fn final_state(&self) -> &Vector {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation, clamped at the ends; works for either time direction.
    pub fn interpolate(&self, t: f64) -> Vector {
        let n = self.times.len();
        if n == 1 {
            return self.states[0].clone();
        }
        let forward = self.times[n - 1] >= self.times[0];
        let key = |s: f64| if forward { s } else { -s };
        let k = key(t);
        if k <= key(self.times[0]) {
            return self.states[0].clone();
        }
        if k >= key(self.times[n - 1]) {
            return self.states[n - 1].clone();
        }
        let i = self.times.partition_point(|&s| key(s) <= k) - 1;
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        &self.states[i] * (1.0 - w) + &self.states[i + 1] * w
    }
}

/// `steps + 1` equally spaced nodes from `t0` to `t1`.
pub fn uniform_grid(t0: f64, t1: f64, steps: usize) -> Vec<f64> {
    let h = (t1 - t0) / steps as f64;
    (0..=steps)
        .map(|i| if i == steps { t1 } else { t0 + i as f64 * h })
        .collect()
}

fn finite_or_blowup(v: &Vector, t: f64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::IntegrationBlowup { time: t })
    }
}

/// One classical RK4 step.
pub fn rk4_step<F>(rhs: &F, t: f64, x: &Vector, h: f64) -> Result<Vector>
where
    F: Fn(f64, &Vector) -> Result<Vector> + ?Sized,
{
    let k1 = rhs(t, x)?;
    finite_or_blowup(&k1, t)?;
    let k2 = rhs(t + 0.5 * h, &(x + &k1 * (0.5 * h)))?;
    finite_or_blowup(&k2, t)?;
    let k3 = rhs(t + 0.5 * h, &(x + &k2 * (0.5 * h)))?;
    finite_or_blowup(&k3, t)?;
    let k4 = rhs(t + h, &(x + &k3 * h))?;
    finite_or_blowup(&k4, t)?;
    let next = x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
    finite_or_blowup(&next, t + h)?;
    Ok(next)
}

/// Fixed-step RK4 over a uniform grid.
pub fn integrate<F>(problem: &OdeProblem<F>) -> Result<Trajectory>
where
    F: Fn(f64, &Vector) -> Result<Vector>,
{
    if problem.steps == 0 {
        return Err(Error::Grid("at least one step is required".into()));
    }
    if !problem.t0.is_finite() || !problem.t1.is_finite() {
        return Err(Error::Grid("non-finite time interval".into()));
    }
    finite_or_blowup(&problem.x0, problem.t0)?;
    let times = uniform_grid(problem.t0, problem.t1, problem.steps);
    let mut states = Vec::with_capacity(times.len());
    states.push(problem.x0.clone());
    for i in 0..problem.steps {
        let h = times[i + 1] - times[i];
        let next = rk4_step(&problem.rhs, times[i], &states[i], h)?;
        states.push(next);
    }
    Ok(Trajectory { times, states })
}

fn mat_to_vec(m: &Matrix) -> Vector {
    Vector::from_column_slice(m.as_slice())
}

fn vec_to_mat(v: &Vector, n: usize) -> Matrix {
    Matrix::from_column_slice(n, v.len() / n, v.as_slice())
}

/// State transition matrix `R(t, s)`: exact exponential for autonomous
/// systems, RK4 on `dR/dτ = A(τ) R` otherwise.
pub fn transition_matrix(sys: &dyn LinearDynamics, t: f64, s: f64, steps: usize) -> Result<Matrix> {
    let n = sys.state_dim();
    if let Some(a) = sys.constant_a() {
        return expm(&(a * (t - s)));
    }
    if t == s {
        return Ok(Matrix::identity(n, n));
    }
    let traj = integrate(&OdeProblem {
        rhs: |tau: f64, r: &Vector| Ok(mat_to_vec(&(sys.a(tau) * vec_to_mat(r, n)))),
        t0: s,
        t1: t,
        x0: mat_to_vec(&Matrix::identity(n, n)),
        steps: steps.max(1),
    })?;
    Ok(vec_to_mat(traj.final_state(), n))
}
