use super::basis::{product_mass, IntervalUnion, SineBasis};
use crate::error::{Error, Result};
use crate::numcore::{expm, simpson, uniform_grid, Matrix, Vector};

/// Galerkin matrix of multiplication by `χ_ω` on the sine modes:
/// `D_jk = (2/L) ∫_ω sin(jπx/L) sin(kπx/L) dx`.
pub fn damping_matrix(basis: &SineBasis, omega: &IntervalUnion) -> Result<Matrix> {
    if (omega.length - basis.length).abs() > 1e-12 * basis.length {
        return Err(Error::InvalidInput("ω and the basis live on different intervals".into()));
    }
    let n = basis.modes;
    Ok(Matrix::from_fn(n, n, |j, k| 2.0 / basis.length * product_mass(omega, j + 1, k + 1)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DampingOptions {
    /// Multiplier on `χ_ω`.
    pub strength: f64,
    /// `(q(0), q'(0))`; default puts energy `1` in every mode.
    pub initial: Option<(Vector, Vector)>,
}

impl Default for DampingOptions {
    fn default() -> Self {
        Self { strength: 1.0, initial: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DampingReport {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    /// Decay rate from the least-squares fit of `log E`.
    pub delta: f64,
    /// Smallest `C₁` with `E(t) ≤ C₁ E(0) e^{−δt}` on the grid.
    pub c1: f64,
    /// `∫₀ᵀ q̇ᵀ D q̇` along the undamped flow from the same data.
    pub observability_value: f64,
}

impl DampingReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.energy.windows(2).all(|w| w[1] < w[0])
    }

    pub fn max_relative_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy.iter().map(|e| (e - e0).abs() / e0).fold(0.0, f64::max)
    }

    /// `max E(t) / (C₁ E(0) e^{−δt})` — at most one by construction of `C₁`.
    pub fn envelope_ratio(&self) -> f64 {
        let e0 = self.energy[0];
        self.times
            .iter()
            .zip(&self.energy)
            .map(|(t, e)| e / (self.c1 * e0 * (-self.delta * t).exp()))
            .fold(0.0, f64::max)
    }
}

fn generator(mu: &Vector, d: &Matrix) -> Matrix {
    let n = mu.len();
    let mut m = Matrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        m[(j, n + j)] = 1.0;
        m[(n + j, j)] = -mu[j];
    }
    m.view_mut((n, n), (n, n)).copy_from(&(-d));
    m
}

fn propagate(m: &Matrix, s0: &Vector, h: f64, samples: usize) -> Result<Vec<Vector>> {
    let step = expm(&(m * h))?;
    let mut out = Vec::with_capacity(samples + 1);
    out.push(s0.clone());
    for i in 0..samples {
        let next = &step * &out[i];
        out.push(next);
    }
    Ok(out)
}

/// Damped truncated wave `q̈ + diag(μ) q + D q̇ = 0`, with
/// `E = ½ Σ (μ_j q_j² + q̇_j²)`, sampled on `samples + 1` nodes of `[0, T_fit]`.
pub fn damping_decay_experiment(
    basis: &SineBasis,
    damping: &IntervalUnion,
    t_fit: f64,
    samples: usize,
    opts: &DampingOptions,
) -> Result<DampingReport> {
    if !(t_fit > 0.0) {
        return Err(Error::InvalidInput("T_fit must be positive".into()));
    }
    if samples < 2 || samples % 2 != 0 {
        return Err(Error::Grid(format!("samples must be even and >= 2, got {samples}")));
    }
    let n = basis.modes;
    let mu = &basis.mu;
    let (q0, p0) = match &opts.initial {
        Some((q, p)) if q.len() == n && p.len() == n => (q.clone(), p.clone()),
        Some(_) => return Err(Error::Dimension(format!("initial data must have {n} modes"))),
        None => (Vector::from_fn(n, |j, _| 1.0 / mu[j].sqrt()), Vector::from_element(n, 1.0)),
    };
    let mut s0 = Vector::zeros(2 * n);
    s0.rows_mut(0, n).copy_from(&q0);
    s0.rows_mut(n, n).copy_from(&p0);
    let energy_of = |s: &Vector| 0.5 * (0..n).map(|j| mu[j] * s[j] * s[j] + s[n + j] * s[n + j]).sum::<f64>();
    let e0 = energy_of(&s0);
    if !(e0 > 0.0) {
        return Err(Error::InvalidInput("initial energy must be positive".into()));
    }

    let d = damping_matrix(basis, damping)? * opts.strength;
    let h = t_fit / samples as f64;
    let times = uniform_grid(0.0, t_fit, samples);
    let damped = propagate(&generator(mu, &d), &s0, h, samples)?;
    let energy: Vec<f64> = damped.iter().map(energy_of).collect();

    // log E ≈ c − δ t
    let logs: Vec<f64> = energy.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let k = times.len() as f64;
    let tm = times.iter().sum::<f64>() / k;
    let lm = logs.iter().sum::<f64>() / k;
    let sxy: f64 = times.iter().zip(&logs).map(|(t, l)| (t - tm) * (l - lm)).sum();
    let sxx: f64 = times.iter().map(|t| (t - tm) * (t - tm)).sum();
    let delta = -sxy / sxx;
    let c1 = times.iter().zip(&energy).map(|(t, e)| e * (delta * t).exp() / e0).fold(0.0, f64::max);

    let free = propagate(&generator(mu, &Matrix::zeros(n, n)), &s0, h, samples)?;
    let dq: Vec<f64> = free
        .iter()
        .map(|s| {
            let v = s.rows(n, n);
            (v.transpose() * &d * v)[(0, 0)]
        })
        .collect();
    let observability_value = simpson(&dq, h)?;

    Ok(DampingReport { times, energy, delta, c1, observability_value })
}
