use crate::error::{Error, Result};
use crate::lincontrol::LtiSystem;
use crate::numcore::{eigenvalues, Matrix, Vector};

/// Solves `A^T P + P A = -I` for Hurwitz `A` through the Kronecker system.
pub fn lyapunov_solve(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Dimension("Lyapunov equation needs a square matrix".into()));
    }
    let n = a.nrows();
    let max_real = eigenvalues(a)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if !(max_real < 0.0) {
        return Err(Error::NotHurwitz { max_real });
    }
    let at = a.transpose();
    let id = Matrix::identity(n, n);
    let big = id.kronecker(&at) + at.kronecker(&id);
    let rhs = -Vector::from_column_slice(id.as_slice());
    let sol = big.lu().solve(&rhs).ok_or_else(|| Error::Singular("Lyapunov Kronecker system".into()))?;
    let p = Matrix::from_column_slice(n, n, sol.as_slice());
    Ok((&p + p.transpose()) * 0.5)
}

fn central4<F: Fn(f64) -> Vector>(f: F, h: f64) -> Vector {
    (f(-2.0 * h) - f(2.0 * h) + (f(h) - f(-h)) * 8.0) / (12.0 * h)
}

/// Jacobians of `f(x, u)` at an equilibrium by fourth-order central
/// differences. `eq_tol = f64::INFINITY` skips the equilibrium check.
pub fn linearize<F>(f: F, xbar: &Vector, ubar: &Vector, eq_tol: f64) -> Result<LtiSystem>
where
    F: Fn(&Vector, &Vector) -> Vector,
{
    let f0 = f(xbar, ubar);
    if f0.len() != xbar.len() {
        return Err(Error::Dimension("f(x, u) must have the state dimension".into()));
    }
    let residual = f0.amax();
    if !(residual <= eq_tol) {
        return Err(Error::NotEquilibrium { residual });
    }
    let n = xbar.len();
    let m = ubar.len();
    let mut a = Matrix::zeros(n, n);
    for j in 0..n {
        let h = 1e-5 * xbar[j].abs().max(1.0);
        a.set_column(j, &central4(|d| {
            let mut x = xbar.clone();
            x[j] += d;
            f(&x, ubar)
        }, h));
    }
    let mut b = Matrix::zeros(n, m);
    for j in 0..m {
        let h = 1e-5 * ubar[j].abs().max(1.0);
        b.set_column(j, &central4(|d| {
            let mut u = ubar.clone();
            u[j] += d;
            f(xbar, &u)
        }, h));
    }
    LtiSystem::new(a, b)
}
