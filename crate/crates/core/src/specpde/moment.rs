use std::f64::consts::PI;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use super::basis::{product_mass, IntervalUnion, SineBasis};
use crate::error::{Error, Result};
use crate::numcore::{rk4_step, uniform_grid, Matrix, Vector};

const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// Families whose Gram matrix is worse conditioned than this are refused:
/// their `f64` coefficients would no longer carry meaningful digits.
pub const DEFAULT_MAX_COND: f64 = 1e14;

struct Big {
    cc: Consts,
}

impl Big {
    fn new() -> Result<Self> {
        Ok(Self { cc: Consts::new().map_err(|e| Error::Config(format!("extended precision setup: {e:?}")))? })
    }

    fn from(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, PREC)
    }

    fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(PREC, RM, &mut self.cc)
    }

    fn to_f64(&mut self, x: &BigFloat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        x.format(Radix::Dec, RM, &mut self.cc).ok().and_then(|s| s.parse().ok()).unwrap_or(f64::NAN)
    }
}

fn gram(big: &mut Big, mu: &[f64], horizon: f64) -> Vec<Vec<BigFloat>> {
    let k = mu.len();
    let one = big.from(1.0);
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let s = big.from(mu[i]).add(&big.from(mu[j]), PREC, RM);
                    let decay = if horizon.is_infinite() {
                        big.from(0.0)
                    } else {
                        let arg = s.mul(&big.from(horizon), PREC, RM).neg();
                        big.exp(&arg)
                    };
                    one.sub(&decay, PREC, RM).div(&s, PREC, RM)
                })
                .collect()
        })
        .collect()
}

fn inf_norm(big: &mut Big, m: &[Vec<BigFloat>]) -> f64 {
    m.iter()
        .map(|row| {
            let mut acc = big.from(0.0);
            for x in row {
                acc = acc.add(&x.abs(), PREC, RM);
            }
            big.to_f64(&acc)
        })
        .fold(0.0, f64::max)
}

/// Gauss–Jordan inverse with partial pivoting.
fn invert(big: &Big, m: &[Vec<BigFloat>]) -> Option<Vec<Vec<BigFloat>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigFloat>> = m.to_vec();
    let mut inv: Vec<Vec<BigFloat>> = (0..n).map(|i| (0..n).map(|j| big.from(if i == j { 1.0 } else { 0.0 })).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r][col].abs_cmp(&a[s][col]).unwrap_or(0).cmp(&0))?;
        if a[piv][col].is_zero() {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = a[col][j].div(&p, PREC, RM);
            inv[col][j] = inv[col][j].div(&p, PREC, RM);
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = f.mul(&a[col][j], PREC, RM);
                a[r][j] = a[r][j].sub(&t, PREC, RM);
                let t = f.mul(&inv[col][j], PREC, RM);
                inv[r][j] = inv[r][j].sub(&t, PREC, RM);
            }
        }
    }
    Some(inv)
}

/// `θ^k(t) = Σ_i c_{ik} e^{−μ_i t}` with `∫₀ᵀ θ^k e^{−μ_j t} dt = δ_{jk}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiorthogonalFamily {
    pub exponents: Vec<f64>,
    pub horizon: f64,
    /// `coefficients[(i, k)] = c_{ik}`.
    pub coefficients: Matrix,
    pub gram_condition: f64,
}

impl BiorthogonalFamily {
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// `θ^k(t)` for `k` in `0..K`.
    pub fn eval(&self, k: usize, t: f64) -> f64 {
        self.exponents.iter().enumerate().map(|(i, m)| self.coefficients[(i, k)] * (-m * t).exp()).sum()
    }

    /// `max |Σ_i c_{ik} G_{ij} − δ_{jk}|` with the rounded `f64`
    /// coefficients and exact (extended precision) Gram entries.
    pub fn residual(&self) -> Result<f64> {
        let mut big = Big::new()?;
        let g = gram(&mut big, &self.exponents, self.horizon);
        let n = self.len();
        let mut worst = 0.0f64;
        for k in 0..n {
            for j in 0..n {
                let mut acc = big.from(if j == k { -1.0 } else { 0.0 });
                for i in 0..n {
                    acc = acc.add(&big.from(self.coefficients[(i, k)]).mul(&g[i][j], PREC, RM), PREC, RM);
                }
                worst = worst.max(big.to_f64(&acc).abs());
            }
        }
        Ok(worst)
    }
}

/// Gram solve in 256-bit arithmetic. `horizon` may be `f64::INFINITY`.
pub fn biorthogonal_family(exponents: &[f64], horizon: f64, k: usize) -> Result<BiorthogonalFamily> {
    biorthogonal_family_with(exponents, horizon, k, DEFAULT_MAX_COND)
}

pub fn biorthogonal_family_with(exponents: &[f64], horizon: f64, k: usize, max_cond: f64) -> Result<BiorthogonalFamily> {
    if k == 0 || k > exponents.len() {
        return Err(Error::InvalidInput(format!("need 1 <= K <= {}, got {k}", exponents.len())));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    let mu = &exponents[..k];
    if mu.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(Error::InvalidInput("exponents must be positive and finite".into()));
    }
    for i in 0..k {
        if mu[..i].contains(&mu[i]) {
            return Err(Error::InvalidInput("exponents must be distinct".into()));
        }
    }
    let mut big = Big::new()?;
    let g = gram(&mut big, mu, horizon);
    let inv = invert(&big, &g).ok_or_else(|| Error::Singular("exponential Gram matrix".into()))?;
    let cond = inf_norm(&mut big, &g) * inf_norm(&mut big, &inv);
    if !(cond <= max_cond) {
        let feasible = (1..k)
            .rev()
            .find(|&kk| biorthogonal_family_with(exponents, horizon, kk, max_cond).is_ok())
            .unwrap_or(0);
        return Err(Error::KTooLarge { requested: k, feasible });
    }
    let coefficients = Matrix::from_fn(k, k, |i, j| big.to_f64(&inv[i][j]));
    Ok(BiorthogonalFamily { exponents: mu.to_vec(), horizon, coefficients, gram_condition: cond })
}

#[derive(Clone, Debug)]
pub struct MomentControl {
    pub family: BiorthogonalFamily,
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    /// `χ_ω u` sampled as `field[(time index, x index)]`.
    pub field: Matrix,
    /// Modal amplitudes `U_k(t)` of `u = Σ U_k(t) sin(kx)`.
    pub amplitudes: Matrix,
    /// Coefficients on `sin(jx)` after re-simulation.
    pub final_coeffs: Vector,
    pub max_residual: f64,
}

/// Null control of the first `N` heat modes on `(0, π)` by the moment method.
/// `y0` holds the coefficients on `sin(jx)`.
pub fn moment_heat_control(
    basis: &SineBasis,
    omega: &IntervalUnion,
    y0: &Vector,
    horizon: f64,
    n: usize,
    time_steps: usize,
    x_points: usize,
) -> Result<MomentControl> {
    if (basis.length - PI).abs() > 1e-12 {
        return Err(Error::InvalidInput("the moment construction is set on (0, π)".into()));
    }
    if (omega.length - PI).abs() > 1e-12 || omega.is_empty() {
        return Err(Error::InvalidInput("ω must be a nonempty subset of (0, π)".into()));
    }
    if n == 0 || n > basis.modes || y0.len() < n {
        return Err(Error::Dimension("need 1 <= N <= modes and N initial coefficients".into()));
    }
    if time_steps == 0 || x_points < 2 {
        return Err(Error::Grid("need at least one time step and two x points".into()));
    }
    let mu: Vec<f64> = (1..=n).map(|j| (j * j) as f64).collect();
    let family = biorthogonal_family(&mu, horizon, n)?;
    let c = 2.0 / PI;
    let mass = Matrix::from_fn(n, n, |j, k| product_mass(omega, j + 1, k + 1));
    let amp = |t: f64| -> Vector {
        Vector::from_fn(n, |k, _| {
            let kk = (k + 1) as f64;
            -y0[k] * (-kk * kk * horizon).exp() * family.eval(k, horizon - t) / (c * mass[(k, k)])
        })
    };
    let times = uniform_grid(0.0, horizon, time_steps);
    let x = uniform_grid(0.0, PI, x_points - 1);
    let amplitudes = Matrix::from_fn(times.len(), n, |i, k| amp(times[i])[k]);
    let field = Matrix::from_fn(times.len(), x.len(), |i, j| {
        if omega.contains(x[j]) {
            (0..n).map(|k| amplitudes[(i, k)] * ((k + 1) as f64 * x[j]).sin()).sum()
        } else {
            0.0
        }
    });
    // y_j' = −j² y_j + (2/π) Σ_k U_k ∫_ω sin(kx) sin(jx)
    let rhs = |t: f64, y: &Vector| -> Result<Vector> {
        let u = amp(t);
        let forcing = mass.transpose() * u * c;
        Ok(Vector::from_fn(n, |j, _| -mu[j] * y[j] + forcing[j]))
    };
    let mut y = y0.rows(0, n).into_owned();
    for i in 0..time_steps {
        y = rk4_step(&rhs, times[i], &y, times[i + 1] - times[i])?;
    }
    let max_residual = y.amax();
    Ok(MomentControl { family, times, x, field, amplitudes, final_coeffs: y, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_family() {
        let f = biorthogonal_family(&[1.0], 50.0, 1).unwrap();
        let want = 2.0 / (1.0 - (-100.0f64).exp());
        assert!((f.coefficients[(0, 0)] - want).abs() < 1e-14);
        let inf = biorthogonal_family(&[1.0], f64::INFINITY, 1).unwrap();
        assert_eq!(inf.coefficients[(0, 0)], 2.0);
    }

    #[test]
    fn exact_residual_is_tiny() {
        let mu: Vec<f64> = (1..=6).map(|j| (j * j) as f64).collect();
        let f = biorthogonal_family(&mu, 1.0, 6).unwrap();
        assert!(f.residual().unwrap() < 1e-8);
    }

    #[test]
    fn oversized_family_reports_feasible_size() {
        let mu: Vec<f64> = (1..=12).map(|j| (j * j) as f64).collect();
        match biorthogonal_family_with(&mu, 1.0, 12, 1e8) {
            Err(Error::KTooLarge { requested: 12, feasible }) => assert!(feasible >= 4 && feasible < 12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_data_zero_control() {
        let b = SineBasis::new(PI, 4).unwrap();
        let w = IntervalUnion::single(PI, 0.0, PI / 2.0).unwrap();
        let r = moment_heat_control(&b, &w, &Vector::zeros(4), 1.0, 4, 200, 33).unwrap();
        assert_eq!(r.field.amax(), 0.0);
    }
}
