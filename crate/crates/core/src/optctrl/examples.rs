//! Worked problems with known solutions, shared by tests and the CLI.

use std::sync::Arc;

use super::pmp::*;
use crate::error::Result;
use crate::numcore::{Matrix, Vector};

fn v2(a: f64, b: f64) -> Vector {
    Vector::from_vec(vec![a, b])
}

/// Cross a river of width `ell` with current `c(y) = 1 + y²` and speed `v`,
/// minimizing the drift `x(t_f)`. The control is the heading as a unit
/// vector `(cos u, sin u)`.
pub fn zermelo_min_drift(v: f64, ell: f64) -> Result<OcProblem> {
    Ok(OcProblem::new(
        v2(0.0, 0.0),
        2,
        Arc::new(move |_, x, w| v2(v * w[0] + 1.0 + x[1] * x[1], v * w[1])),
        Arc::new(|_, _, _| 0.0),
        TerminalCondition::Manifold {
            f: Arc::new(move |x| Vector::from_element(1, x[1] - ell)),
            jacobian: Arc::new(|_| Matrix::from_row_slice(1, 2, &[0.0, 1.0])),
        },
        Horizon::Free,
        hamiltonian_maximizer_ball(1.0),
        Some(ControlAffine { g: Arc::new(move |_, _| Matrix::identity(2, 2) * v), linear_cost: None }),
    )?
    .with_terminal_cost(TerminalCost::linear(v2(1.0, 0.0))))
}

pub fn zermelo_current(y: f64) -> f64 {
    1.0 + y * y
}

/// Minimum-time slide to `(x1, 0)` in the reduced `(x, v)` coordinates.
pub fn brachistochrone(x1: f64, g: f64) -> Result<OcProblem> {
    OcProblem::new(
        v2(0.0, 0.0),
        2,
        Arc::new(move |_, x, w| v2(x[1] * w[0], g * w[1])),
        Arc::new(|_, _, _| 1.0),
        TerminalCondition::Fixed(v2(x1, 0.0)),
        Horizon::Free,
        hamiltonian_maximizer_ball(1.0),
        Some(ControlAffine { g: Arc::new(move |_, x| Matrix::from_row_slice(2, 2, &[x[1], 0.0, 0.0, g])), linear_cost: None }),
    )
}

/// Minimum time to the origin for `x'' = u`, `|u| <= 1`.
pub fn double_integrator_min_time(x0: Vector) -> Result<OcProblem> {
    OcProblem::new(
        x0,
        1,
        Arc::new(|_, x, u| v2(x[1], u[0])),
        Arc::new(|_, _, _| 1.0),
        TerminalCondition::Fixed(v2(0.0, 0.0)),
        Horizon::Free,
        hamiltonian_maximizer_box(1.0, 1),
        Some(ControlAffine { g: Arc::new(|_, _| Matrix::from_column_slice(2, 1, &[0.0, 1.0])), linear_cost: None }),
    )
}

/// `t_f = 2 sqrt(x1 + x2²/2) + x2` for initial points above the switching
/// curve, and the symmetric expression below it.
pub fn double_integrator_min_time_closed_form(x1: f64, x2: f64) -> f64 {
    let s = x1 + 0.5 * x2 * x2.abs();
    if s > 0.0 {
        2.0 * (x1 + 0.5 * x2 * x2).sqrt() + x2
    } else if s < 0.0 {
        2.0 * (-x1 + 0.5 * x2 * x2).sqrt() - x2
    } else {
        x2.abs()
    }
}

/// `x' = x(a − b y)`, `y' = −c y + u`, `u ∈ [0, umax]`, minimizing
/// `x(T) + ∫ u`.
pub fn predator_prey(a: f64, b: f64, c: f64, umax: f64, x0: Vector, horizon: f64) -> Result<OcProblem> {
    Ok(OcProblem::new(
        x0,
        1,
        Arc::new(move |_, x, u| v2(x[0] * (a - b * x[1]), -c * x[1] + u[0])),
        Arc::new(|_, _, u| u[0]),
        TerminalCondition::Free,
        Horizon::Fixed(horizon),
        Maximizer::Box { lower: Vector::zeros(1), upper: Vector::from_element(1, umax) },
        Some(ControlAffine {
            g: Arc::new(|_, _| Matrix::from_column_slice(2, 1, &[0.0, 1.0])),
            linear_cost: Some(Arc::new(|_, _| Vector::from_element(1, 1.0))),
        }),
    )?
    .with_terminal_cost(TerminalCost::linear(v2(1.0, 0.0))))
}
