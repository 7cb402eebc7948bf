use super::LinearDynamics;
use crate::error::{Error, Result};
use crate::numcore::{numerical_rank, Matrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DerivativePolicy {
    /// Use the analytic `dB/dt` when available, finite differences otherwise.
    #[default]
    FiniteDifference,
    /// Refuse to differentiate numerically.
    AnalyticOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LtvKalmanReport {
    pub t: f64,
    pub rank: usize,
    pub satisfied: bool,
    pub blocks: Vec<Matrix>,
}

fn fd_step(t: f64) -> f64 {
    1e-4 * t.abs().max(1.0)
}

fn central4<F: Fn(f64) -> Result<Matrix>>(f: &F, t: f64) -> Result<Matrix> {
    let h = fd_step(t);
    Ok((f(t - 2.0 * h)? - f(t + 2.0 * h)? + (f(t + h)? - f(t - h)?) * 8.0) / (12.0 * h))
}

fn block(sys: &dyn LinearDynamics, k: usize, t: f64, policy: DerivativePolicy) -> Result<Matrix> {
    if k == 0 {
        return Ok(sys.b(t));
    }
    let prev_dot = if k == 1 {
        match (sys.b_derivative(t), policy) {
            (Some(d), _) => d,
            (None, DerivativePolicy::FiniteDifference) => central4(&|s| Ok(sys.b(s)), t)?,
            (None, DerivativePolicy::AnalyticOnly) => {
                return Err(Error::Config("dB/dt is not available and finite differences are disabled".into()))
            }
        }
    } else if policy == DerivativePolicy::AnalyticOnly {
        return Err(Error::Config("higher derivatives need finite differences".into()));
    } else {
        central4(&|s| block(sys, k - 1, s, policy), t)?
    };
    Ok(sys.a(t) * block(sys, k - 1, t, policy)? - prev_dot)
}

/// `B_0 = B`, `B_{k+1} = A B_k - dB_k/dt`, for `k < depth`.
pub fn ltv_kalman_blocks(sys: &dyn LinearDynamics, t: f64, depth: usize, policy: DerivativePolicy) -> Result<Vec<Matrix>> {
    // Constant A and B: every derivative vanishes and B_k = A^k B.
    if let (Some(a), Some(bd)) = (sys.constant_a(), sys.b_derivative(t)) {
        if bd.iter().all(|&x| x == 0.0) {
            let mut out = vec![sys.b(t)];
            for k in 1..depth {
                out.push(a * &out[k - 1]);
            }
            out.truncate(depth);
            return Ok(out);
        }
    }
    (0..depth).map(|k| block(sys, k, t, policy)).collect()
}

/// Sufficient controllability test at time `t` from the rank of
/// `[B_0(t), .., B_{depth-1}(t)]`.
pub fn ltv_kalman_test(sys: &dyn LinearDynamics, t: f64, depth: usize, tol: f64, policy: DerivativePolicy) -> Result<LtvKalmanReport> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    let blocks = ltv_kalman_blocks(sys, t, depth, policy)?;
    let n = sys.state_dim();
    let m = sys.input_dim();
    let mut stacked = Matrix::zeros(n, m * depth);
    for (i, b) in blocks.iter().enumerate() {
        stacked.view_mut((0, i * m), (n, m)).copy_from(b);
    }
    let rank = numerical_rank(&stacked, tol);
    Ok(LtvKalmanReport { t, rank, satisfied: rank == n, blocks })
}
