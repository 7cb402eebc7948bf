use super::LinearDynamics;
use crate::control::SampledControl;
use crate::error::{Error, Result};
use crate::numcore::parallel::{map_indexed, try_map_indexed};
use crate::numcore::{expm, rk4_step, simpson, simpson_matrices, simpson_vectors, uniform_grid, Execution, Matrix, Vector};

#[derive(Clone, Copy, Debug)]
pub struct GramianOptions {
    /// Simpson intervals (must be even).
    pub steps: usize,
    /// `G` counts as invertible when `C_T > rel_tol * lambda_max`.
    pub rel_tol: f64,
    pub exec: Execution,
}

impl Default for GramianOptions {
    fn default() -> Self {
        Self { steps: 2000, rel_tol: 1e-12, exec: Execution::Auto }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramianReport {
    pub matrix: Matrix,
    /// Eigenvalues in increasing order.
    pub eigenvalues: Vec<f64>,
    /// Smallest eigenvalue.
    pub c_t: f64,
    pub invertible: bool,
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < 2 || steps % 2 == 1 {
        return Err(Error::Grid(format!("Simpson needs an even number of intervals, got {steps}")));
    }
    Ok(())
}

/// `R(T, t_i)` on `intervals + 1` equally spaced nodes of `[0, T]`.
fn backward_transitions(sys: &dyn LinearDynamics, horizon: f64, intervals: usize, exec: Execution) -> Result<Vec<Matrix>> {
    let times = uniform_grid(0.0, horizon, intervals);
    if let Some(a) = sys.constant_a() {
        return try_map_indexed(times.len(), exec, |i| expm(&(a * (horizon - times[i]))));
    }
    // d/dt R(T, t) = -R(T, t) A(t), integrated backwards from R(T, T) = I.
    let n = sys.state_dim();
    let rhs = |t: f64, r: &Vector| -> Result<Vector> {
        let m = Matrix::from_column_slice(n, n, r.as_slice());
        Ok(Vector::from_column_slice((-(m * sys.a(t))).as_slice()))
    };
    let mut out = vec![Matrix::zeros(n, n); times.len()];
    let mut cur = Vector::from_column_slice(Matrix::identity(n, n).as_slice());
    out[intervals] = Matrix::identity(n, n);
    for i in (0..intervals).rev() {
        cur = rk4_step(&rhs, times[i + 1], &cur, times[i] - times[i + 1])?;
        out[i] = Matrix::from_column_slice(n, n, cur.as_slice());
    }
    Ok(out)
}

fn report_from(g: Matrix, rel_tol: f64) -> GramianReport {
    let g = (&g + g.transpose()) * 0.5;
    let mut ev: Vec<f64> = g.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let c_t = ev.first().copied().unwrap_or(0.0);
    let lmax = ev.last().copied().unwrap_or(0.0);
    GramianReport { invertible: lmax > 0.0 && c_t > rel_tol * lmax, c_t, eigenvalues: ev, matrix: g }
}

pub fn gramian(sys: &dyn LinearDynamics, horizon: f64, steps: usize) -> Result<GramianReport> {
    gramian_with(sys, horizon, &GramianOptions { steps, ..Default::default() })
}

/// `G_T = ∫_0^T R(T,t) B(t) B(t)^T R(T,t)^T dt` by composite Simpson.
pub fn gramian_with(sys: &dyn LinearDynamics, horizon: f64, opts: &GramianOptions) -> Result<GramianReport> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
    }
    check_steps(opts.steps)?;
    let phis = backward_transitions(sys, horizon, opts.steps, opts.exec)?;
    let times = uniform_grid(0.0, horizon, opts.steps);
    let integrand = map_indexed(times.len(), opts.exec, |i| {
        let rb = &phis[i] * sys.b(times[i]);
        &rb * rb.transpose()
    });
    let g = simpson_matrices(&integrand, horizon / opts.steps as f64)?;
    Ok(report_from(g, opts.rel_tol))
}

#[derive(Clone, Debug)]
pub struct HumControl {
    pub control: SampledControl,
    pub psi: Vector,
    /// `psi^T G psi`, the minimal L2 energy.
    pub cost: f64,
    /// `∫ |u|^2` by Simpson on the integration grid.
    pub energy: f64,
    pub endpoint: Vector,
    pub endpoint_error: f64,
    pub gramian: GramianReport,
}

pub fn hum_control_finite(sys: &dyn LinearDynamics, horizon: f64, x0: &Vector, x1: &Vector, steps: usize) -> Result<HumControl> {
    hum_control_finite_with(sys, horizon, x0, x1, &GramianOptions { steps, ..Default::default() })
}

/// Minimal-L2 control `u(t) = B(t)^T R(T,t)^T psi` steering `x0` to `x1`,
/// re-simulated with RK4 on the same grid.
pub fn hum_control_finite_with(
    sys: &dyn LinearDynamics,
    horizon: f64,
    x0: &Vector,
    x1: &Vector,
    opts: &GramianOptions,
) -> Result<HumControl> {
    let n = sys.state_dim();
    if x0.len() != n || x1.len() != n {
        return Err(Error::Dimension("endpoint lengths".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
    }
    check_steps(opts.steps)?;
    // Fine grid carries the RK4 half-step nodes.
    let fine = 2 * opts.steps;
    let phis = backward_transitions(sys, horizon, fine, opts.exec)?;
    let fine_t = uniform_grid(0.0, horizon, fine);
    let h = horizon / opts.steps as f64;
    let integrand = map_indexed(opts.steps + 1, opts.exec, |i| {
        let rb = &phis[2 * i] * sys.b(fine_t[2 * i]);
        &rb * rb.transpose()
    });
    let gram = report_from(simpson_matrices(&integrand, h)?, opts.rel_tol);
    if !gram.invertible {
        return Err(Error::SingularGramian { c_t: gram.c_t });
    }
    let mut free = &phis[0] * x0;
    if sys.drift(0.0).is_some() {
        let drift_terms = map_indexed(opts.steps + 1, opts.exec, |i| {
            &phis[2 * i] * sys.drift(fine_t[2 * i]).expect("drift")
        });
        free += simpson_vectors(&drift_terms, h)?;
    }
    let psi = gram
        .matrix
        .clone()
        .lu()
        .solve(&(x1 - free))
        .ok_or(Error::SingularGramian { c_t: gram.c_t })?;
    let values = map_indexed(fine + 1, opts.exec, |i| sys.b(fine_t[i]).transpose() * phis[i].transpose() * &psi);
    let energy = simpson(
        &(0..=opts.steps).map(|i| values[2 * i].norm_squared()).collect::<Vec<_>>(),
        h,
    )?;
    let control = SampledControl::new(fine_t, values)?;
    let rhs = |t: f64, x: &Vector| -> Result<Vector> {
        let mut dx = sys.a(t) * x + sys.b(t) * control.eval(t);
        if let Some(r) = sys.drift(t) {
            dx += r;
        }
        Ok(dx)
    };
    let mut x = x0.clone();
    let grid = uniform_grid(0.0, horizon, opts.steps);
    for i in 0..opts.steps {
        x = rk4_step(&rhs, grid[i], &x, grid[i + 1] - grid[i])?;
    }
    let cost = psi.dot(&(&gram.matrix * &psi));
    Ok(HumControl {
        endpoint_error: (&x - x1).norm(),
        endpoint: x,
        control,
        psi,
        cost,
        energy,
        gramian: gram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lincontrol::{LtiSystem, LtvSystem};

    fn double_integrator() -> LtiSystem {
        LtiSystem::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]], &[&[0.0], &[1.0]]).unwrap()
    }

    #[test]
    fn double_integrator_gramian_closed_form() {
        let g = gramian(&double_integrator(), 1.0, 200).unwrap();
        let want = Matrix::from_row_slice(2, 2, &[1.0 / 3.0, 0.5, 0.5, 1.0]);
        assert!((g.matrix - want).amax() < 1e-13);
    }

    #[test]
    fn hum_rest_to_rest() {
        let x0 = Vector::from_vec(vec![0.0, 0.0]);
        let x1 = Vector::from_vec(vec![1.0, 0.0]);
        let h = hum_control_finite(&double_integrator(), 1.0, &x0, &x1, 1000).unwrap();
        // u(t) = 6 - 12 t
        for (t, u) in h.control.times.iter().zip(&h.control.values) {
            assert!((u[0] - (6.0 - 12.0 * t)).abs() < 1e-9);
        }
        assert!(h.endpoint_error < 1e-10);
        assert!((h.cost - 12.0).abs() < 1e-9);
    }

    #[test]
    fn ltv_route_matches_lti_route() {
        let lti = double_integrator();
        let ltv = LtvSystem::from_fns(|_| Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]), |_| Matrix::from_column_slice(2, 1, &[0.0, 1.0]))
            .unwrap();
        let a = gramian(&lti, 2.0, 400).unwrap();
        let b = gramian(&ltv, 2.0, 400).unwrap();
        assert!((a.matrix - b.matrix).amax() < 1e-12);
    }

    #[test]
    fn odd_steps_rejected() {
        assert!(matches!(gramian(&double_integrator(), 1.0, 7), Err(Error::Grid(_))));
    }
}
