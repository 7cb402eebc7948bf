use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numcore::{numerical_rank, Matrix, Vector};

type FieldFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
type JacFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

const FD_STEP: f64 = 1e-5;

/// Smooth vector field with an optional analytic Jacobian.
#[derive(Clone)]
pub struct VectorField {
    value: FieldFn,
    jacobian: Option<JacFn>,
}

impl VectorField {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        Self { value: Arc::new(f), jacobian: None }
    }

    pub fn with_jacobian<J>(mut self, j: J) -> Self
    where
        J: Fn(&Vector) -> Matrix + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn eval(&self, x: &Vector) -> Vector {
        (self.value)(x)
    }

    /// Analytic Jacobian if given, central differences otherwise.
    pub fn jacobian(&self, x: &Vector) -> Matrix {
        if let Some(j) = &self.jacobian {
            return j(x);
        }
        let n = x.len();
        let f0 = self.eval(x);
        let mut jac = Matrix::zeros(f0.len(), n);
        for i in 0..n {
            let h = FD_STEP * x[i].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            jac.set_column(i, &((self.eval(&xp) - self.eval(&xm)) / (2.0 * h)));
        }
        jac
    }

    /// The field `[self, other]` as a new (Jacobian-less) field.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        let (x, y) = (self.clone(), other.clone());
        VectorField::new(move |p| lie_bracket_fields(&x, &y, p))
    }
}

impl std::fmt::Debug for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "VectorField {{ analytic_jacobian: {} }}", self.jacobian.is_some())
    }
}

fn lie_bracket_fields(x: &VectorField, y: &VectorField, p: &Vector) -> Vector {
    y.jacobian(p) * x.eval(p) - x.jacobian(p) * y.eval(p)
}

/// `[X, Y](p) = DY(p) X(p) - DX(p) Y(p)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField, p: &Vector) -> Result<Vector> {
    let (fx, fy) = (x.eval(p), y.eval(p));
    if fx.len() != p.len() || fy.len() != p.len() {
        return Err(Error::Dimension("vector field output length".into()));
    }
    Ok(lie_bracket_fields(x, y, p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LarcReport {
    pub rank: usize,
    pub full_rank: bool,
    /// Number of brackets (including the fields themselves) evaluated.
    pub evaluated: usize,
}

/// Rank of the span of all brackets of length `<= depth` at `p`.
pub fn larc_rank(fields: &[VectorField], p: &Vector, depth: usize, tol: f64) -> Result<LarcReport> {
    if fields.is_empty() || depth == 0 {
        return Err(Error::InvalidInput("need at least one field and depth >= 1".into()));
    }
    let n = p.len();
    let mut columns: Vec<Vector> = Vec::new();
    let mut level: Vec<VectorField> = fields.to_vec();
    let mut rank = 0;
    for d in 1..=depth {
        if d > 1 {
            let mut next = Vec::new();
            for g in fields {
                for (j, h) in level.iter().enumerate() {
                    // skip [f_i, f_i]
                    if d == 2 && std::ptr::eq(g, &fields[j]) {
                        continue;
                    }
                    next.push(g.bracket(h));
                }
            }
            level = next;
        }
        for f in &level {
            let v = f.eval(p);
            if v.len() != n {
                return Err(Error::Dimension("vector field output length".into()));
            }
            columns.push(v);
        }
        rank = numerical_rank(&Matrix::from_columns(&columns), tol);
        if rank == n {
            break;
        }
    }
    Ok(LarcReport { rank, full_rank: rank == n, evaluated: columns.len() })
}
