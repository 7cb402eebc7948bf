use crate::error::{Error, Result};
use crate::numcore::{eigenvalues, Complex, Matrix};

/// Real polynomial `a0 z^n + a1 z^{n-1} + .. + an`, highest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCoeffs(Vec<f64>);

impl PolyCoeffs {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        match coeffs.first() {
            None => Err(Error::InvalidInput("empty polynomial".into())),
            Some(&a0) if a0 == 0.0 => Err(Error::InvalidInput("leading coefficient is zero".into())),
            _ if coeffs.iter().any(|c| !c.is_finite()) => Err(Error::InvalidInput("non-finite coefficient".into())),
            _ => Ok(Self(coeffs)),
        }
    }

    /// Monic polynomial with the given roots; complex roots should come in
    /// conjugate pairs (imaginary parts of the result are dropped).
    pub fn from_roots(roots: &[Complex]) -> Self {
        let mut c = vec![Complex::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex::new(0.0, 0.0); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i] += ci;
                next[i + 1] -= ci * r;
            }
            c = next;
        }
        Self(c.into_iter().map(|z| z.re).collect())
    }

    pub fn from_real_roots(roots: &[f64]) -> Self {
        Self::from_roots(&roots.iter().map(|&r| Complex::new(r, 0.0)).collect::<Vec<_>>())
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn monic(&self) -> Self {
        Self(self.0.iter().map(|c| c / self.0[0]).collect())
    }

    pub fn roots(&self) -> Result<Vec<Complex>> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let m = self.monic();
        let c = Matrix::from_fn(n, n, |i, j| {
            if i == 0 {
                -m.0[j + 1]
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        eigenvalues(&c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouthReport {
    pub table: Vec<Vec<f64>>,
    /// All `n + 1` rows were built with nonzero leading entries.
    pub complete: bool,
    /// Sign changes in the first column; `None` for an incomplete table.
    pub sign_changes: Option<usize>,
    pub hurwitz: bool,
}

const ROUTH_ZERO: f64 = 1e-12;

pub fn routh(p: &PolyCoeffs) -> RouthReport {
    let a = p.coeffs();
    let n = p.degree();
    let width = n / 2 + 1;
    let pick = |start: usize| -> Vec<f64> {
        (0..width).map(|i| a.get(start + 2 * i).copied().unwrap_or(0.0)).collect()
    };
    let mut table = vec![pick(0)];
    if n >= 1 {
        table.push(pick(1));
    }
    let amax = |r: &[f64]| r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut complete = n == 0 || table[1][0].abs() > ROUTH_ZERO * amax(&table[0]).max(amax(&table[1]));
    while complete && table.len() < n + 1 {
        let k = table.len();
        let (r2, r1) = (&table[k - 2], &table[k - 1]);
        let row: Vec<f64> = (0..width)
            .map(|i| {
                let x2 = r2.get(i + 1).copied().unwrap_or(0.0);
                let x1 = r1.get(i + 1).copied().unwrap_or(0.0);
                (r1[0] * x2 - r2[0] * x1) / r1[0]
            })
            .collect();
        let scale = amax(r1).max(amax(r2));
        if row[0].abs() <= ROUTH_ZERO * scale {
            complete = false;
        }
        table.push(row);
    }
    let sign_changes = complete.then(|| table.windows(2).filter(|w| (w[0][0] > 0.0) != (w[1][0] > 0.0)).count());
    RouthReport { hurwitz: sign_changes == Some(0), complete, sign_changes, table }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HurwitzReport {
    pub matrix: Matrix,
    /// Leading principal minors `Δ_1 .. Δ_n`.
    pub minors: Vec<f64>,
    pub hurwitz: bool,
}

pub fn hurwitz(p: &PolyCoeffs) -> Result<HurwitzReport> {
    let a = p.coeffs();
    if a[0] <= 0.0 {
        return Err(Error::NormalizeFirst);
    }
    let n = p.degree();
    let coef = |k: isize| if k < 0 || k as usize > n { 0.0 } else { a[k as usize] };
    let h = Matrix::from_fn(n, n, |i, j| coef(2 * (j as isize + 1) - (i as isize + 1)));
    let minors: Vec<f64> = (1..=n).map(|k| h.view((0, 0), (k, k)).into_owned().determinant()).collect();
    Ok(HurwitzReport { hurwitz: minors.iter().all(|&d| d > 0.0), minors, matrix: h })
}
