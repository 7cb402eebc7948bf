use super::basis::{product_mass, IntervalUnion, SineBasis, WaveState};
use crate::error::{Error, Result};
use crate::numcore::parallel::map_indexed;
use crate::numcore::{simpson, simpson_matrices, uniform_grid, Execution, Matrix, Vector};

fn check_time(horizon: f64, steps: usize) -> Result<()> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!("observation time must be positive, got {horizon}")));
    }
    if steps < 2 || steps % 2 == 1 {
        return Err(Error::Grid(format!("Simpson needs an even number of intervals, got {steps}")));
    }
    Ok(())
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `∂ₓψ(t, L) = Σ (−1)^k (a_k cos(kπt/L) + b_k sin(kπt/L))`.
fn boundary_trace(basis: &SineBasis, s: &WaveState, t: f64) -> f64 {
    (1..=basis.modes)
        .map(|k| {
            let (sn, cs) = (basis.omega(k) * t).sin_cos();
            sign(k) * (s.a[k - 1] * cs + s.b[k - 1] * sn)
        })
        .sum()
}

/// `∫₀ᵀ |∂ₓψ(t, L)|² dt` by Simpson in time.
pub fn boundary_observation_energy(basis: &SineBasis, s: &WaveState, horizon: f64, steps: usize) -> Result<f64> {
    check_time(horizon, steps)?;
    let t = uniform_grid(0.0, horizon, steps);
    let vals = map_indexed(t.len(), Execution::Auto, |i| boundary_trace(basis, s, t[i]).powi(2));
    simpson(&vals, horizon / steps as f64)
}

/// `∫₀ᵀ ∫_ω φ² dx dt` for `φ = Σ (a_j cos + b_j sin)(jπt/L) sin(jπx/L)`.
pub fn internal_wave_observation(basis: &SineBasis, s: &WaveState, omega: &IntervalUnion, horizon: f64, steps: usize) -> Result<f64> {
    check_time(horizon, steps)?;
    if (omega.length - basis.length).abs() > 1e-12 * basis.length {
        return Err(Error::InvalidInput("ω and the basis live on different intervals".into()));
    }
    let n = basis.modes;
    let mass = Matrix::from_fn(n, n, |j, k| product_mass(omega, j + 1, k + 1));
    let t = uniform_grid(0.0, horizon, steps);
    let vals = map_indexed(t.len(), Execution::Auto, |i| {
        let alpha = Vector::from_fn(n, |j, _| {
            let (sn, cs) = (basis.omega(j + 1) * t[i]).sin_cos();
            s.a[j] * cs + s.b[j] * sn
        });
        alpha.dot(&(&mass * &alpha))
    });
    simpson(&vals, horizon / steps as f64)
}

/// Smallest ratio of boundary observation to wave energy over the truncated
/// space (a generalized Rayleigh quotient).
pub fn boundary_observability_constant(basis: &SineBasis, horizon: f64, steps: usize) -> Result<f64> {
    check_time(horizon, steps)?;
    let n = basis.modes;
    let t = uniform_grid(0.0, horizon, steps);
    let outer = map_indexed(t.len(), Execution::Auto, |i| {
        let c = Vector::from_fn(2 * n, |r, _| {
            let k = r / 2 + 1;
            let (sn, cs) = (basis.omega(k) * t[i]).sin_cos();
            sign(k) * if r % 2 == 0 { cs } else { sn }
        });
        &c * c.transpose()
    });
    let o = simpson_matrices(&outer, horizon / steps as f64)?;
    let min = o.symmetric_eigenvalues().min();
    Ok(min / (0.5 * basis.length))
}
