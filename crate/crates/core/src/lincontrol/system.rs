use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numcore::{Matrix, Vector};

pub type MatrixFn = Arc<dyn Fn(f64) -> Matrix + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(f64) -> Vector + Send + Sync>;

/// `x' = A(t) x + B(t) u + r(t)`.
pub trait LinearDynamics: Send + Sync {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn a(&self, t: f64) -> Matrix;
    fn b(&self, t: f64) -> Matrix;
    fn drift(&self, _t: f64) -> Option<Vector> {
        None
    }
    /// Analytic `dB/dt`, when known.
    fn b_derivative(&self, _t: f64) -> Option<Matrix> {
        None
    }
    /// `Some(A)` when `A` does not depend on time.
    fn constant_a(&self) -> Option<&Matrix> {
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LtiSystem {
    pub a: Matrix,
    pub b: Matrix,
    pub r: Option<Vector>,
}

impl LtiSystem {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("A is {}x{}", a.nrows(), a.ncols())));
        }
        if b.nrows() != a.nrows() || b.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "B is {}x{} for a state of dimension {}",
                b.nrows(),
                b.ncols(),
                a.nrows()
            )));
        }
        if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite system matrix".into()));
        }
        Ok(Self { a, b, r: None })
    }

    pub fn with_drift(mut self, r: Vector) -> Result<Self> {
        if r.len() != self.a.nrows() {
            return Err(Error::Dimension("drift length".into()));
        }
        self.r = Some(r);
        Ok(self)
    }

    pub fn from_rows(a: &[&[f64]], b: &[&[f64]]) -> Result<Self> {
        Self::new(rows(a)?, rows(b)?)
    }
}

pub(crate) fn rows(r: &[&[f64]]) -> Result<Matrix> {
    let n = r.len();
    let m = r.first().map_or(0, |x| x.len());
    if r.iter().any(|x| x.len() != m) {
        return Err(Error::Dimension("ragged matrix rows".into()));
    }
    Ok(Matrix::from_fn(n, m, |i, j| r[i][j]))
}

impl LinearDynamics for LtiSystem {
    fn state_dim(&self) -> usize {
        self.a.nrows()
    }
    fn input_dim(&self) -> usize {
        self.b.ncols()
    }
    fn a(&self, _t: f64) -> Matrix {
        self.a.clone()
    }
    fn b(&self, _t: f64) -> Matrix {
        self.b.clone()
    }
    fn drift(&self, _t: f64) -> Option<Vector> {
        self.r.clone()
    }
    fn b_derivative(&self, _t: f64) -> Option<Matrix> {
        Some(Matrix::zeros(self.b.nrows(), self.b.ncols()))
    }
    fn constant_a(&self) -> Option<&Matrix> {
        Some(&self.a)
    }
}

#[derive(Clone)]
pub struct LtvSystem {
    n: usize,
    m: usize,
    a: MatrixFn,
    b: MatrixFn,
    r: Option<VectorFn>,
    b_dot: Option<MatrixFn>,
}

impl LtvSystem {
    /// Shapes are checked by sampling at `t = 0`.
    pub fn new(a: MatrixFn, b: MatrixFn) -> Result<Self> {
        let a0 = a(0.0);
        let b0 = b(0.0);
        if !a0.is_square() || b0.nrows() != a0.nrows() || b0.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "A(0) is {}x{}, B(0) is {}x{}",
                a0.nrows(),
                a0.ncols(),
                b0.nrows(),
                b0.ncols()
            )));
        }
        Ok(Self { n: a0.nrows(), m: b0.ncols(), a, b, r: None, b_dot: None })
    }

    pub fn from_fns<FA, FB>(a: FA, b: FB) -> Result<Self>
    where
        FA: Fn(f64) -> Matrix + Send + Sync + 'static,
        FB: Fn(f64) -> Matrix + Send + Sync + 'static,
    {
        Self::new(Arc::new(a), Arc::new(b))
    }

    pub fn with_b_derivative<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> Matrix + Send + Sync + 'static,
    {
        self.b_dot = Some(Arc::new(f));
        self
    }

    pub fn with_drift<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> Vector + Send + Sync + 'static,
    {
        self.r = Some(Arc::new(f));
        self
    }
}

impl LinearDynamics for LtvSystem {
    fn state_dim(&self) -> usize {
        self.n
    }
    fn input_dim(&self) -> usize {
        self.m
    }
    fn a(&self, t: f64) -> Matrix {
        (self.a)(t)
    }
    fn b(&self, t: f64) -> Matrix {
        (self.b)(t)
    }
    fn drift(&self, t: f64) -> Option<Vector> {
        self.r.as_ref().map(|r| r(t))
    }
    fn b_derivative(&self, t: f64) -> Option<Matrix> {
        self.b_dot.as_ref().map(|f| f(t))
    }
}

impl std::fmt::Debug for LtvSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LtvSystem {{ n: {}, m: {} }}", self.n, self.m)
    }
}
