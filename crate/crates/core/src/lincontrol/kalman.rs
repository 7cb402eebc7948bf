use nalgebra::DMatrix;

use super::LtiSystem;
use crate::error::{Error, Result};
use crate::numcore::eigenvalues as linalg_eigenvalues;
use crate::numcore::{characteristic_polynomial, numerical_rank, Complex, Matrix, DEFAULT_RANK_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct KalmanReport {
    pub rank: usize,
    pub controllable: bool,
    pub matrix: Matrix,
    pub singular_values: Vec<f64>,
}

/// `[B, AB, .., A^{n-1} B]`.
pub fn kalman_matrix(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.nrows();
    let m = b.ncols();
    let mut k = Matrix::zeros(n, n * m);
    let mut blk = b.clone();
    for i in 0..n {
        k.view_mut((0, i * m), (n, m)).copy_from(&blk);
        blk = a * blk;
    }
    k
}

pub fn kalman_test(sys: &LtiSystem, tol: f64) -> Result<KalmanReport> {
    let k = kalman_matrix(&sys.a, &sys.b);
    if k.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("Kalman matrix overflowed".into()));
    }
    let rank = numerical_rank(&k, tol);
    Ok(KalmanReport {
        rank,
        controllable: rank == sys.a.nrows(),
        singular_values: crate::numcore::singular_values(&k),
        matrix: k,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HautusReport {
    pub controllable: bool,
    /// Each eigenvalue with the rank of `[λI - A | B]`.
    pub eigen_ranks: Vec<(Complex, usize)>,
}

pub fn hautus_test(sys: &LtiSystem, tol: f64) -> Result<HautusReport> {
    let n = sys.a.nrows();
    let m = sys.b.ncols();
    let eig = linalg_eigenvalues(&sys.a)?;
    let scale = sys.a.amax().max(1.0);
    let mut distinct: Vec<Complex> = Vec::new();
    for l in eig {
        if !distinct.iter().any(|d| (d - l).norm() <= 1e-12 * scale) {
            distinct.push(l);
        }
    }
    let mut eigen_ranks = Vec::with_capacity(distinct.len());
    for l in distinct {
        let pencil = DMatrix::<Complex>::from_fn(n, n + m, |i, j| {
            if j < n {
                let d = if i == j { l } else { Complex::new(0.0, 0.0) };
                d - Complex::new(sys.a[(i, j)], 0.0)
            } else {
                Complex::new(sys.b[(i, j - n)], 0.0)
            }
        });
        let s = pencil.svd(false, false).singular_values;
        let smax = s.iter().copied().fold(0.0, f64::max);
        let rank = s.iter().filter(|&&x| x > tol * smax).count();
        eigen_ranks.push((l, rank));
    }
    Ok(HautusReport { controllable: eigen_ranks.iter().all(|&(_, r)| r == n), eigen_ranks })
}

/// `P A P^{-1} = [[A1, A3], [0, A2]]`, `P B = [B1; 0]` with `(A1, B1)`
/// controllable and `P` orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct ControllableDecomposition {
    pub rank: usize,
    pub p: Matrix,
    pub p_inv: Matrix,
    pub a1: Matrix,
    pub a2: Matrix,
    pub a3: Matrix,
    pub b1: Matrix,
    /// Size of the blocks that should vanish exactly.
    pub residual: f64,
}

pub fn controllable_decomposition(sys: &LtiSystem, tol: f64) -> Result<ControllableDecomposition> {
    let n = sys.a.nrows();
    let k = kalman_matrix(&sys.a, &sys.b);
    let rank = numerical_rank(&k, tol);
    // Right singular vectors of K^T span the range of K first.
    let svd = k.transpose().svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::NoConvergence("SVD of Kalman matrix".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let q = Matrix::from_fn(n, n, |i, j| vt[(order[j], i)]);
    let p = q.transpose();
    let at = &p * &sys.a * &q;
    let bt = &p * &sys.b;
    let r = rank;
    let residual = at.view((r, 0), (n - r, r)).amax().max(bt.rows(r, n - r).amax());
    Ok(ControllableDecomposition {
        rank,
        a1: at.view((0, 0), (r, r)).into_owned(),
        a2: at.view((r, r), (n - r, n - r)).into_owned(),
        a3: at.view((0, r), (r, n - r)).into_owned(),
        b1: bt.rows(0, r).into_owned(),
        p,
        p_inv: q,
        residual,
    })
}

/// Companion matrix with ones on the superdiagonal and last row
/// `(-a_n, .., -a_1)` for the monic polynomial `[1, a_1, .., a_n]`.
pub fn companion(coeffs: &[f64]) -> Matrix {
    let n = coeffs.len() - 1;
    let mut c = Matrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        c[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        c[(n - 1, j)] = -coeffs[n - j] / coeffs[0];
    }
    c
}

#[derive(Clone, Debug, PartialEq)]
pub struct BrunovskiForm {
    pub p: Matrix,
    pub p_inv: Matrix,
    pub companion: Matrix,
    /// Monic characteristic polynomial `[1, a_1, .., a_n]` of `A`.
    pub char_poly: Vec<f64>,
}

/// Single-input change of basis to companion form.
pub fn brunovski_form(sys: &LtiSystem) -> Result<BrunovskiForm> {
    let n = sys.a.nrows();
    if sys.b.ncols() != 1 {
        return Err(Error::UnsupportedShape(format!("Brunovski form needs m = 1, got m = {}", sys.b.ncols())));
    }
    let rank = numerical_rank(&kalman_matrix(&sys.a, &sys.b), DEFAULT_RANK_TOL);
    if rank < n {
        return Err(Error::NotControllable { rank, dim: n });
    }
    let cp = characteristic_polynomial(&sys.a)?;
    let b = sys.b.column(0).into_owned();
    let mut p_inv = Matrix::zeros(n, n);
    p_inv.set_column(n - 1, &b);
    for k in (0..n - 1).rev() {
        // column k holds f_{k+1}; a_{n-k-1} in 1-based coefficient indexing
        let next = &sys.a * p_inv.column(k + 1) + &b * cp[n - k - 1];
        p_inv.set_column(k, &next);
    }
    let p = p_inv
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("Brunovski basis".into()))?;
    Ok(BrunovskiForm { p, p_inv, companion: companion(&cp), char_poly: cp })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn springs(k1: f64, k2: f64) -> LtiSystem {
        LtiSystem::from_rows(
            &[
                &[0.0, 1.0, 0.0, 0.0],
                &[-(k1 + k2), 0.0, k2, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
                &[k2, 0.0, -k2, 0.0],
            ],
            &[&[0.0], &[0.0], &[0.0], &[1.0]],
        )
        .unwrap()
    }

    #[test]
    fn coupled_springs() {
        assert_eq!(kalman_test(&springs(1.0, 2.0), 1e-9).unwrap().rank, 4);
        let r = kalman_test(&springs(1.0, 0.0), 1e-9).unwrap();
        assert!(!r.controllable);
        assert!(!hautus_test(&springs(1.0, 0.0), 1e-9).unwrap().controllable);
    }

    #[test]
    fn decomposition_of_uncontrollable_pair() {
        let sys = springs(1.0, 0.0);
        let d = controllable_decomposition(&sys, 1e-9).unwrap();
        assert_eq!(d.rank, 2);
        assert!(d.residual < 1e-12);
        assert_eq!(kalman_test(&LtiSystem::new(d.a1.clone(), d.b1.clone()).unwrap(), 1e-9).unwrap().rank, 2);
    }

    #[test]
    fn brunovski_companion() {
        let sys = LtiSystem::from_rows(&[&[1.0, 2.0, 0.0], &[0.0, -1.0, 1.0], &[3.0, 0.0, 0.5]], &[&[0.0], &[1.0], &[1.0]])
            .unwrap();
        let f = brunovski_form(&sys).unwrap();
        assert!((&f.p * &sys.a * &f.p_inv - &f.companion).amax() < 1e-10);
        let e3 = &f.p * &sys.b;
        assert!((e3 - Matrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0])).amax() < 1e-12);
    }

    #[test]
    fn brunovski_rejects_multi_input() {
        let sys = LtiSystem::new(Matrix::identity(2, 2), Matrix::identity(2, 2)).unwrap();
        assert!(matches!(brunovski_form(&sys), Err(Error::UnsupportedShape(_))));
    }
}
