use super::PolyCoeffs;
use crate::error::{Error, Result};
use crate::lincontrol::{brunovski_form, kalman_matrix, LtiSystem};
use crate::numcore::{characteristic_polynomial, eigenvalues, numerical_rank, Complex, Matrix, Vector, DEFAULT_RANK_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackGain {
    /// `u = K x`, shape `m x n`.
    pub k: Matrix,
    pub closed_loop_poly: Vec<f64>,
    pub closed_loop_eigenvalues: Vec<Complex>,
    /// Max coefficient deviation from the target, relative to `max(1, |target|)`.
    pub residual: f64,
}

fn coeff_residual(a: &Matrix, b: &Matrix, k: &Matrix, target: &[f64]) -> Result<(Vec<f64>, f64)> {
    let cp = characteristic_polynomial(&(a + b * k))?;
    let scale = target.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let r = cp.iter().zip(target).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale;
    Ok((cp, r))
}

fn single_input_gain(a: &Matrix, b: &Matrix, target: &[f64]) -> Result<Matrix> {
    let n = a.nrows();
    let sys = LtiSystem::new(a.clone(), b.clone())?;
    let form = brunovski_form(&sys)?;
    let kt = Matrix::from_fn(1, n, |_, i| form.char_poly[n - i] - target[n - i]);
    let mut k = kt * &form.p;
    // Closed-loop coefficients are affine in k: polish with a couple of
    // Newton steps on the exact linear map.
    for _ in 0..2 {
        let (c0, r0) = coeff_residual(a, b, &k, target)?;
        if r0 < 1e-14 {
            break;
        }
        let mut jac = Matrix::zeros(n, n);
        for j in 0..n {
            let mut kj = k.clone();
            kj[(0, j)] += 1.0;
            let cj = characteristic_polynomial(&(a + b * &kj))?;
            for i in 0..n {
                jac[(i, j)] = cj[i + 1] - c0[i + 1];
            }
        }
        let rhs = Vector::from_fn(n, |i, _| target[i + 1] - c0[i + 1]);
        let Some(dk) = jac.lu().solve(&rhs) else { break };
        let cand = &k + Matrix::from_row_slice(1, n, dk.as_slice());
        if coeff_residual(a, b, &cand, target)?.1 < r0 {
            k = cand;
        } else {
            break;
        }
    }
    Ok(k)
}

/// Feedback `u = K x` with `χ(A + B K)` equal to the monic `target`.
///
/// Single input goes through the Brunovski form. With several inputs and
/// distinct targets the spare freedom is spent on a well-conditioned
/// closed-loop eigenbasis; otherwise the pair is first reduced to a cyclic
/// single input.
pub fn pole_place(sys: &LtiSystem, target: &PolyCoeffs, tol: f64) -> Result<FeedbackGain> {
    let roots = if sys.b.ncols() > 1 { target.roots().ok() } else { None };
    place(sys, target, roots.as_deref(), tol)
}

/// Same as [`pole_place`] with the target given by its roots, which are
/// used as-is instead of being recomputed from the coefficients.
pub fn pole_place_roots(sys: &LtiSystem, roots: &[Complex], tol: f64) -> Result<FeedbackGain> {
    place(sys, &PolyCoeffs::from_roots(roots), Some(roots), tol)
}

fn place(sys: &LtiSystem, target: &PolyCoeffs, roots: Option<&[Complex]>, tol: f64) -> Result<FeedbackGain> {
    let n = sys.a.nrows();
    let m = sys.b.ncols();
    if target.degree() != n {
        return Err(Error::DegreeMismatch { expected: n, got: target.degree() });
    }
    let rank = numerical_rank(&kalman_matrix(&sys.a, &sys.b), DEFAULT_RANK_TOL);
    if rank < n {
        return Err(Error::NotControllable { rank, dim: n });
    }
    let goal = target.monic();
    let goal = goal.coeffs();
    let robust = if m > 1 { roots.and_then(|r| robust_gain(&sys.a, &sys.b, r)) } else { None };
    let robust = robust.filter(|k| coeff_residual(&sys.a, &sys.b, k, goal).map_or(false, |(_, r)| r <= tol));
    let k = if let Some(k) = robust {
        k
    } else if m == 1 {
        single_input_gain(&sys.a, &sys.b, goal)?
    } else {
        let (k1, y) = cyclic_reduction(&sys.a, &sys.b)?;
        let a1 = &sys.a + &sys.b * &k1;
        let by = &sys.b * &y;
        let k2 = single_input_gain(&a1, &by, goal)?;
        k1 + y * k2
    };
    let (cp, residual) = coeff_residual(&sys.a, &sys.b, &k, goal)?;
    if !(residual <= tol) {
        return Err(Error::PlacementVerification { residual, tol });
    }
    Ok(FeedbackGain { closed_loop_eigenvalues: eigenvalues(&(&sys.a + &sys.b * &k))?, k, closed_loop_poly: cp, residual })
}

type CMatrix = nalgebra::DMatrix<Complex>;
type CVector = nalgebra::DVector<Complex>;

/// Orthonormal basis `U` of the admissible eigenvectors for `λ`, i.e. the
/// `v`-parts of `ker [A − λI, B]`, and the map `v ↦ w` with `K v = w`.
fn admissible_space(a: &Matrix, b: &Matrix, lambda: Complex) -> Option<(CMatrix, CMatrix)> {
    let (n, m) = (a.nrows(), b.ncols());
    let mut big = CMatrix::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..n {
            big[(i, j)] = Complex::new(a[(i, j)], 0.0);
        }
        big[(i, i)] -= lambda;
        for j in 0..m {
            big[(i, n + j)] = Complex::new(b[(i, j)], 0.0);
        }
    }
    let svd = big.svd(false, true);
    let vt = svd.v_t?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..n + m).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let z = CMatrix::from_fn(n + m, m, |r, c| vt[(order[c], r)].conj());
    let (zv, zw) = (z.rows(0, n).into_owned(), z.rows(n, m).into_owned());
    // v = Zv c, w = Zw c  =>  w = Zw Zv⁺ v on range(Zv)
    let svd = zv.svd(true, true);
    let (u, vt) = (svd.u?, svd.v_t?);
    let sv = &svd.singular_values;
    let top = sv.max();
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > 1e-10 * top).collect();
    if keep.is_empty() {
        return None;
    }
    let basis = CMatrix::from_fn(n, keep.len(), |r, c| u[(r, keep[c])]);
    let mut pinv = CMatrix::zeros(m, n);
    for &i in &keep {
        let ui = u.column(i);
        let vi = vt.row(i).adjoint();
        pinv += vi * ui.adjoint() / Complex::new(sv[i], 0.0);
    }
    Some((basis, zw * pinv))
}

/// Iterative eigenvector assignment in the spirit of Kautsky, Nichols and
/// Van Dooren: each eigenvector is rotated, inside its admissible space,
/// towards the orthogonal complement of the others. Needs distinct targets
/// closed under conjugation.
fn robust_gain(a: &Matrix, b: &Matrix, roots: &[Complex]) -> Option<Matrix> {
    let n = a.nrows();
    let scale = roots.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    for (i, z) in roots.iter().enumerate() {
        if roots[..i].iter().any(|w| (w - z).norm() < 1e-8 * scale) {
            return None;
        }
        if !roots.iter().any(|w| (w - z.conj()).norm() < 1e-12 * scale) {
            return None;
        }
    }
    // one representative per conjugate pair (im > 0) plus the reals
    let mut slots: Vec<(usize, Option<usize>)> = Vec::new();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        used[i] = true;
        if roots[i].im.abs() <= 1e-12 * scale {
            slots.push((i, None));
        } else {
            let j = (0..n).find(|&j| !used[j] && (roots[j] - roots[i].conj()).norm() < 1e-12 * scale)?;
            used[j] = true;
            slots.push((i, Some(j)));
        }
    }
    let lam: Vec<Complex> = roots.iter().map(|z| if z.im.abs() <= 1e-12 * scale { Complex::new(z.re, 0.0) } else { *z }).collect();
    let spaces: Vec<(CMatrix, CMatrix)> = lam.iter().map(|&l| admissible_space(a, b, l)).collect::<Option<_>>()?;

    let mut v = CMatrix::zeros(n, n);
    for &(i, j) in &slots {
        let col: CVector = spaces[i].0.column(0).into_owned();
        v.set_column(i, &col);
        if let Some(j) = j {
            v.set_column(j, &col.map(|c| c.conj()));
        }
    }
    let cond = |v: &CMatrix| {
        let sv = v.clone().svd(false, false).singular_values;
        sv.max() / sv.min()
    };
    let mut best = cond(&v);
    for _sweep in 0..30 {
        for &(i, j) in &slots {
            let mut others = v.clone();
            others.column_mut(i).fill(Complex::new(0.0, 0.0));
            if let Some(j) = j {
                others.column_mut(j).fill(Complex::new(0.0, 0.0));
            }
            let svd = others.svd(true, false);
            let u = svd.u?;
            let sv = &svd.singular_values;
            let k = (0..n).min_by(|&x, &y| sv[x].total_cmp(&sv[y]))?;
            let y: CVector = u.column(k).into_owned();
            let q = &spaces[i].0;
            let proj = q * (q.adjoint() * &y);
            let norm = proj.norm();
            if norm < 1e-12 {
                continue;
            }
            let col = proj / Complex::new(norm, 0.0);
            v.set_column(i, &col);
            if let Some(j) = j {
                v.set_column(j, &col.map(|c| c.conj()));
            }
        }
        let c = cond(&v);
        if c > best * (1.0 - 1e-6) {
            best = best.min(c);
            break;
        }
        best = c;
    }
    if !best.is_finite() || best > 1e14 {
        return None;
    }
    let mut w = CMatrix::zeros(b.ncols(), n);
    for i in 0..n {
        let col = &spaces[i].1 * v.column(i);
        w.set_column(i, &col);
    }
    let k = w * v.try_inverse()?;
    Some(k.map(|z| z.re))
}

fn smallest_normalized_sv(cols: &[Vector]) -> f64 {
    let normed: Vec<Vector> = cols.iter().map(|c| c / c.norm()).collect();
    let m = Matrix::from_columns(&normed);
    m.svd(false, false).singular_values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Returns `(K1, y)` such that `B y` is a cyclic vector of `A + B K1`.
fn cyclic_reduction(a: &Matrix, b: &Matrix) -> Result<(Matrix, Matrix)> {
    let n = a.nrows();
    let m = b.ncols();
    let unit = |j: usize| Vector::from_fn(m, |i, _| if i == j { 1.0 } else { 0.0 });
    let j0 = (0..m)
        .max_by(|&i, &j| b.column(i).norm().total_cmp(&b.column(j).norm()))
        .expect("m > 1");
    let y = unit(j0);
    let mut xs = vec![b * &y];
    let mut us: Vec<Vector> = Vec::new();
    while xs.len() < n {
        let last = xs.last().unwrap().clone();
        let mut best: Option<(f64, Vector, Vector)> = None;
        for cand in std::iter::once(Vector::zeros(m)).chain((0..m).map(unit)) {
            let x = a * &last + b * &cand;
            if x.norm() == 0.0 {
                continue;
            }
            let mut cols = xs.clone();
            cols.push(x.clone());
            let s = smallest_normalized_sv(&cols);
            if best.as_ref().map_or(true, |(bs, _, _)| s > *bs) {
                best = Some((s, cand, x));
            }
        }
        match best {
            Some((s, u, x)) if s > 1e-10 => {
                us.push(u);
                xs.push(x);
            }
            _ => return Err(Error::Singular("could not build a cyclic chain".into())),
        }
    }
    us.push(Vector::zeros(m));
    let x = Matrix::from_columns(&xs);
    let u = Matrix::from_columns(&us);
    let x_inv = x.try_inverse().ok_or_else(|| Error::Singular("cyclic chain basis".into()))?;
    Ok((u * x_inv, Matrix::from_column_slice(m, 1, y.as_slice())))
}
