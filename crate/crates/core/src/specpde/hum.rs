use super::basis::{SineBasis, WaveState};
use crate::error::{Error, Result};
use crate::numcore::parallel::map_indexed;
use crate::numcore::{rk4_step, simpson, simpson_matrices, uniform_grid, Execution, Matrix, Vector};

/// Inner product used to identify states with adjoint states.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Pivot {
    /// `L² × H⁻¹`, the natural space for Dirichlet boundary control.
    #[default]
    L2Hminus1,
    /// `H¹₀ × L²`, i.e. plain Euclidean `(a, b)` coordinates.
    H1L2,
}

#[derive(Clone, Copy, Debug)]
pub struct WaveHumOptions {
    pub steps: usize,
    pub pivot: Pivot,
    /// Build and solve even when `T < 2L`.
    pub force: bool,
    pub max_condition: f64,
    pub exec: Execution,
}

impl Default for WaveHumOptions {
    fn default() -> Self {
        Self { steps: 4000, pivot: Pivot::default(), force: false, max_condition: 1e12, exec: Execution::Auto }
    }
}

/// Truncated controlled wave in interleaved `(a_k, b_k)` coordinates:
/// `a_k' = ω_k b_k`, `b_k' = −ω_k a_k + (2/L) ω_k (−1)^{k+1} u`.
struct Model<'a> {
    basis: &'a SineBasis,
    scale: Vector,
}

impl Model<'_> {
    fn new(basis: &SineBasis, pivot: Pivot) -> Model<'_> {
        let scale = Vector::from_fn(2 * basis.modes, |r, _| match pivot {
            Pivot::H1L2 => 1.0,
            Pivot::L2Hminus1 => 1.0 / basis.omega(r / 2 + 1),
        });
        Model { basis, scale }
    }

    fn input(&self, k: usize) -> f64 {
        let sgn = if k % 2 == 1 { 1.0 } else { -1.0 };
        2.0 / self.basis.length * self.basis.omega(k) * sgn
    }

    /// `D e^{(T−t)A} B` in pivot coordinates.
    fn kernel(&self, tau: f64) -> Vector {
        let n = self.basis.modes;
        let mut v = Vector::zeros(2 * n);
        for k in 1..=n {
            let (sn, cs) = (self.basis.omega(k) * tau).sin_cos();
            let beta = self.input(k);
            v[2 * (k - 1)] = sn * beta * self.scale[2 * (k - 1)];
            v[2 * (k - 1) + 1] = cs * beta * self.scale[2 * (k - 1) + 1];
        }
        v
    }

    fn rhs(&self, x: &Vector, u: f64) -> Vector {
        let n = self.basis.modes;
        let mut dx = Vector::zeros(2 * n);
        for k in 1..=n {
            let w = self.basis.omega(k);
            dx[2 * (k - 1)] = w * x[2 * (k - 1) + 1];
            dx[2 * (k - 1) + 1] = -w * x[2 * (k - 1)] + self.input(k) * u;
        }
        dx
    }
}

#[derive(Clone, Debug)]
pub struct WaveGramian {
    pub matrix: Matrix,
    pub condition: f64,
    pub min_singular: f64,
}

/// Gramian of the boundary control map in pivot coordinates.
pub fn wave_boundary_gramian(basis: &SineBasis, horizon: f64, opts: &WaveHumOptions) -> Result<WaveGramian> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    if opts.steps < 2 || opts.steps % 2 == 1 {
        return Err(Error::Grid("Simpson needs an even number of intervals".into()));
    }
    let model = Model::new(basis, opts.pivot);
    let t = uniform_grid(0.0, horizon, opts.steps);
    let terms = map_indexed(t.len(), opts.exec, |i| {
        let v = model.kernel(horizon - t[i]);
        &v * v.transpose()
    });
    let g = simpson_matrices(&terms, horizon / opts.steps as f64)?;
    let g = (&g + g.transpose()) * 0.5;
    let ev = g.clone().symmetric_eigenvalues();
    let (min, max) = (ev.min(), ev.max());
    Ok(WaveGramian { condition: if min > 0.0 { max / min } else { f64::INFINITY }, min_singular: min.max(0.0), matrix: g })
}

#[derive(Clone, Debug)]
pub struct WaveHum {
    /// Adjoint state `z̄` (pivot coordinates, interleaved into `a`/`b`).
    pub z: WaveState,
    pub times: Vec<f64>,
    pub control: Vec<f64>,
    pub endpoint: WaveState,
    /// Max-norm coefficient error after forward simulation.
    pub endpoint_error: f64,
    /// `∫ ū²` by Simpson.
    pub control_norm_sq: f64,
    /// `⟨G z̄, z̄⟩`.
    pub gz_z: f64,
    pub gramian: WaveGramian,
}

/// Minimal-norm boundary control steering `y0` to `y1` in time `T` for the
/// `N`-mode truncation.
pub fn hum_wave_boundary(basis: &SineBasis, y0: &WaveState, y1: &WaveState, horizon: f64, opts: &WaveHumOptions) -> Result<WaveHum> {
    let n = basis.modes;
    if y0.a.len() != n || y0.b.len() != n || y1.a.len() != n || y1.b.len() != n {
        return Err(Error::Dimension("wave states must match the basis".into()));
    }
    let gram = wave_boundary_gramian(basis, horizon, opts)?;
    if horizon < 2.0 * basis.length && !opts.force {
        return Err(Error::IllPosed {
            reason: format!("T = {horizon} < 2L = {}; boundary observability fails uniformly in N", 2.0 * basis.length),
            min_singular: gram.min_singular,
        });
    }
    if !(gram.condition <= opts.max_condition) {
        return Err(Error::IllPosed { reason: format!("Gramian condition number {:e}", gram.condition), min_singular: gram.min_singular });
    }
    let model = Model::new(basis, opts.pivot);
    let free = super::basis::wave_evolve(basis, y0, horizon)?.to_interleaved();
    let target = y1.to_interleaved();
    let rhs_vec = (target.clone() - free).component_mul(&model.scale);
    let z = gram
        .matrix
        .clone()
        .cholesky()
        .ok_or_else(|| Error::IllPosed { reason: "Gramian is not positive definite".into(), min_singular: gram.min_singular })?
        .solve(&rhs_vec);
    let times = uniform_grid(0.0, horizon, opts.steps);
    let ctrl = |t: f64| model.kernel(horizon - t).dot(&z);
    let control: Vec<f64> = map_indexed(times.len(), opts.exec, |i| ctrl(times[i]));
    let h = horizon / opts.steps as f64;
    let control_norm_sq = simpson(&control.iter().map(|u| u * u).collect::<Vec<_>>(), h)?;
    let gz_z = z.dot(&(&gram.matrix * &z));
    let rhs = |t: f64, x: &Vector| -> Result<Vector> { Ok(model.rhs(x, ctrl(t))) };
    let mut x = y0.to_interleaved();
    for i in 0..opts.steps {
        x = rk4_step(&rhs, times[i], &x, times[i + 1] - times[i])?;
    }
    let endpoint_error = (&x - &target).amax();
    Ok(WaveHum {
        z: WaveState::from_interleaved(&z),
        times,
        control,
        endpoint: WaveState::from_interleaved(&x),
        endpoint_error,
        control_norm_sq,
        gz_z,
        gramian: gram,
    })
}
