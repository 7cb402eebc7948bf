use super::{Complex, Matrix};
use crate::error::{Error, Result};

pub const DEFAULT_RANK_TOL: f64 = 1e-9;

pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > rel_tol * smax).count(),
        _ => 0,
    }
}

/// Monic characteristic polynomial `[1, a1, .., an]` of a square matrix,
/// expanded from its Schur eigenvalues.
pub fn characteristic_polynomial(a: &Matrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Dimension("characteristic polynomial of a non-square matrix".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(vec![1.0]);
    }
    let eig = eigenvalues(a)?;
    let mut c = vec![Complex::new(1.0, 0.0)];
    for l in &eig {
        let mut next = vec![Complex::new(0.0, 0.0); c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i] += ci;
            next[i + 1] -= ci * l;
        }
        c = next;
    }
    Ok(c.into_iter().map(|z| z.re).collect())
}

pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex>> {
    if let Some(s) = nalgebra::Schur::try_new(a.clone(), f64::EPSILON, 10_000) {
        return Ok(s.complex_eigenvalues().iter().copied().collect());
    }
    // The unshifted-start Francis iteration can cycle on permutation-like
    // matrices (companions of z^4 + z^2 + 1, for one). The transpose and a
    // few real shifts have the same spectrum but break the symmetry.
    if let Some(s) = nalgebra::Schur::try_new(a.transpose(), f64::EPSILON, 10_000) {
        return Ok(s.complex_eigenvalues().iter().copied().collect());
    }
    let n = a.nrows();
    let scale = a.amax().max(1.0);
    for frac in [0.1, -0.37, 0.73] {
        let sigma = frac * scale;
        let shifted = a + Matrix::identity(n, n) * sigma;
        if let Some(s) = nalgebra::Schur::try_new(shifted, f64::EPSILON, 10_000) {
            return Ok(s.complex_eigenvalues().iter().map(|z| z - sigma).collect());
        }
    }
    Err(Error::NoConvergence("Schur decomposition".into()))
}
