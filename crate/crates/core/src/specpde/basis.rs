use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numcore::Vector;

/// Dirichlet sine modes `sin(jπx/L)`, `j = 1..=N`, with `μ_j = (jπ/L)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct SineBasis {
    pub length: f64,
    pub modes: usize,
    pub mu: Vector,
}

impl SineBasis {
    pub fn new(length: f64, modes: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() || modes == 0 {
            return Err(Error::InvalidInput(format!("need L > 0 and N >= 1, got L = {length}, N = {modes}")));
        }
        let mu = Vector::from_fn(modes, |j, _| ((j + 1) as f64 * PI / length).powi(2));
        Ok(Self { length, modes, mu })
    }

    /// `jπ/L` for `j >= 1`.
    pub fn omega(&self, j: usize) -> f64 {
        j as f64 * PI / self.length
    }

    /// Normalization `√(2/L)` of the orthonormal modes.
    pub fn norm(&self) -> f64 {
        (2.0 / self.length).sqrt()
    }

    /// `‖Σ c_j e_j‖²_{H¹₀}` for orthonormal coefficients.
    pub fn h1_norm_sq(&self, c: &Vector) -> f64 {
        c.iter().zip(self.mu.iter()).map(|(c, m)| m * c * c).sum()
    }

    /// `‖Σ c_j e_j‖²_{H⁻¹}` for orthonormal coefficients.
    pub fn hminus1_norm_sq(&self, c: &Vector) -> f64 {
        c.iter().zip(self.mu.iter()).map(|(c, m)| c * c / m).sum()
    }

    fn check(&self, v: &Vector) -> Result<()> {
        if v.len() != self.modes {
            return Err(Error::Dimension(format!("expected {} coefficients, got {}", self.modes, v.len())));
        }
        Ok(())
    }
}

/// Wave coefficients: `ψ = Σ (L/kπ)(a_k cos(kπt/L) + b_k sin(kπt/L)) sin(kπx/L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    pub a: Vector,
    pub b: Vector,
}

impl WaveState {
    pub fn zeros(n: usize) -> Self {
        Self { a: Vector::zeros(n), b: Vector::zeros(n) }
    }

    pub fn mode(n: usize, j: usize) -> Self {
        let mut s = Self::zeros(n);
        s.a[j - 1] = 1.0;
        s
    }

    /// `Σ (a_k² + b_k²)`.
    pub fn coefficient_energy(&self) -> f64 {
        self.a.norm_squared() + self.b.norm_squared()
    }

    /// `‖ψ‖²_{H¹₀} + ‖∂ₜψ‖²_{L²} = (L/2) Σ (a² + b²)`.
    pub fn energy(&self, basis: &SineBasis) -> f64 {
        0.5 * basis.length * self.coefficient_energy()
    }

    pub(crate) fn to_interleaved(&self) -> Vector {
        Vector::from_fn(2 * self.a.len(), |i, _| if i % 2 == 0 { self.a[i / 2] } else { self.b[i / 2] })
    }

    pub(crate) fn from_interleaved(v: &Vector) -> Self {
        let n = v.len() / 2;
        Self { a: Vector::from_fn(n, |k, _| v[2 * k]), b: Vector::from_fn(n, |k, _| v[2 * k + 1]) }
    }
}

/// Multiplies mode `j` by `e^{−μ_j t}`.
pub fn heat_evolve(basis: &SineBasis, coeffs: &Vector, t: f64) -> Result<Vector> {
    basis.check(coeffs)?;
    if t < 0.0 {
        return Err(Error::InvalidInput("the heat flow cannot be run backwards".into()));
    }
    Ok(Vector::from_fn(basis.modes, |j, _| coeffs[j] * (-basis.mu[j] * t).exp()))
}

/// Rotation by `jπt/L` in every `(a_j, b_j)` plane.
pub fn wave_evolve(basis: &SineBasis, s: &WaveState, t: f64) -> Result<WaveState> {
    basis.check(&s.a)?;
    basis.check(&s.b)?;
    let mut out = WaveState::zeros(basis.modes);
    for j in 0..basis.modes {
        let (sn, cs) = (basis.omega(j + 1) * t).sin_cos();
        out.a[j] = s.a[j] * cs + s.b[j] * sn;
        out.b[j] = -s.a[j] * sn + s.b[j] * cs;
    }
    Ok(out)
}

/// Finite union of disjoint open subintervals of `(0, L)`, sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalUnion {
    pub length: f64,
    pub intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn new(length: f64, intervals: Vec<(f64, f64)>) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidInput("L must be positive".into()));
        }
        for &(a, b) in &intervals {
            if !(0.0 <= a && a < b && b <= length) {
                return Err(Error::InvalidInput(format!("interval ({a}, {b}) is not inside (0, {length})")));
            }
        }
        if intervals.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(Error::InvalidInput("intervals must be sorted and disjoint".into()));
        }
        Ok(Self { length, intervals })
    }

    pub fn single(length: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(length, vec![(a, b)])
    }

    /// No damping / no observation region.
    pub fn empty(length: f64) -> Self {
        Self { length, intervals: Vec::new() }
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a < x && x < b)
    }
}

/// `∫_ω sin²(jπx/L) dx`.
pub fn sin2_mass(omega: &IntervalUnion, j: usize) -> f64 {
    product_mass(omega, j, j)
}

/// `∫_ω sin(jπx/L) sin(kπx/L) dx` from the antiderivatives.
pub fn product_mass(omega: &IntervalUnion, j: usize, k: usize) -> f64 {
    let l = omega.length;
    // ∫ cos(mπx/L) dx
    let cos_int = |m: i64, a: f64, b: f64| -> f64 {
        if m == 0 {
            b - a
        } else {
            let w = m as f64 * PI / l;
            ((w * b).sin() - (w * a).sin()) / w
        }
    };
    let (j, k) = (j as i64, k as i64);
    omega
        .intervals
        .iter()
        .map(|&(a, b)| 0.5 * (cos_int(j - k, a, b) - cos_int(j + k, a, b)))
        .sum()
}

/// `½(|ω| − (L/π) sin(π|ω|/L))`.
pub fn sin2_lower_bound(length: f64, measure: f64) -> f64 {
    0.5 * (measure - length / PI * (PI * measure / length).sin())
}

/// The set of measure `|ω|` that minimizes `∫_ω sin²(jπx/L)`: slabs of
/// width `|ω|/j` centered on the zeros `kL/j`.
pub fn optimal_set(length: f64, measure: f64, j: usize) -> Result<IntervalUnion> {
    if !(measure > 0.0 && measure <= length) || j == 0 {
        return Err(Error::InvalidInput("need 0 < |ω| <= L and j >= 1".into()));
    }
    let half = measure / (2.0 * j as f64);
    let mut iv = vec![(0.0, half)];
    for k in 1..j {
        let c = k as f64 * length / j as f64;
        iv.push((c - half, c + half));
    }
    iv.push((length - half, length));
    // adjacent slabs touch when |ω| = L: merge them
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in iv {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    IntervalUnion::new(length, merged)
}
