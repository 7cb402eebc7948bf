use std::sync::Arc;

use crate::control::ControlLaw;
use crate::error::{Error, Result};
use crate::numcore::{rk4_step, uniform_grid, Trajectory, Vector};

pub type Field = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// `x' = f0(x) + Σ u_i g_i(x)`.
#[derive(Clone)]
pub struct ControlAffineSystem {
    pub drift: Field,
    pub fields: Vec<Field>,
}

impl ControlAffineSystem {
    pub fn rhs(&self, x: &Vector, u: &Vector) -> Vector {
        let mut dx = (self.drift)(x);
        for (g, ui) in self.fields.iter().zip(u.iter()) {
            dx += g(x) * *ui;
        }
        dx
    }
}

/// `u_i = -<∇V(x), g_i(x)>`, clipped to `[-s, s]` when a saturation is given.
pub fn jurdjevic_quinn_feedback(sys: &ControlAffineSystem, grad_v: Field, saturation: Option<f64>) -> ControlLaw {
    let fields = sys.fields.clone();
    ControlLaw::feedback(move |_t, x| {
        let gv = grad_v(x);
        Ok(Vector::from_iterator(
            fields.len(),
            fields.iter().map(|g| {
                let u = -gv.dot(&g(x));
                match saturation {
                    Some(s) => u.clamp(-s, s),
                    None => u,
                }
            }),
        ))
    })
}

#[derive(Clone, Debug)]
pub struct ClosedLoopRun {
    pub trajectory: Trajectory,
    /// Control at every node.
    pub controls: Vec<Vector>,
    /// `V(x(t_i))` when a Lyapunov function was supplied.
    pub lyapunov: Option<Vec<f64>>,
}

impl ClosedLoopRun {
    /// Largest increase of `V` between consecutive nodes (`<= 0` means monotone).
    pub fn max_lyapunov_increase(&self) -> Option<f64> {
        self.lyapunov
            .as_ref()
            .map(|v| v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max))
    }
}

/// RK4 on `x' = f(t, x, law(t, x))` with the law re-evaluated at every stage.
pub fn simulate_closed_loop<F>(
    f: F,
    law: &ControlLaw,
    x0: &Vector,
    horizon: f64,
    steps: usize,
    lyapunov: Option<&dyn Fn(&Vector) -> f64>,
) -> Result<ClosedLoopRun>
where
    F: Fn(f64, &Vector, &Vector) -> Vector,
{
    if steps == 0 || !(horizon > 0.0) {
        return Err(Error::Grid("need a positive horizon and at least one step".into()));
    }
    let times = uniform_grid(0.0, horizon, steps);
    let rhs = |t: f64, x: &Vector| -> Result<Vector> { Ok(f(t, x, &law.eval(t, x)?)) };
    let mut states = vec![x0.clone()];
    for i in 0..steps {
        let next = rk4_step(&rhs, times[i], &states[i], times[i + 1] - times[i])?;
        states.push(next);
    }
    let controls = times.iter().zip(&states).map(|(&t, x)| law.eval(t, x)).collect::<Result<Vec<_>>>()?;
    let lyap = lyapunov.map(|v| states.iter().map(|x| v(x)).collect());
    Ok(ClosedLoopRun { trajectory: Trajectory { times, states }, controls, lyapunov: lyap })
}
