use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lincontrol::{kalman_matrix, LtiSystem};
use crate::numcore::{eigenvalues, expm, simpson, uniform_grid, Matrix, Trajectory, Vector};
use crate::stabilize::{lyapunov_solve, pole_place, PolyCoeffs};

pub type Nonlinearity = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `∂_t y = ∂_xx y + f(y)` on `(0, L)` with `y(t,0) = 0`, `y(t,L) = u(t)`.
#[derive(Clone)]
pub struct SemilinearPlant {
    pub length: f64,
    pub f_prime_0: f64,
    pub f: Nonlinearity,
    /// Stabilized modes.
    pub n: usize,
    /// Simulated modes.
    pub n_sim: usize,
    /// `None` picks `max(10·max(1, |f'(0)|), 2·γ_min)`.
    pub gamma: Option<f64>,
}

impl std::fmt::Debug for SemilinearPlant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemilinearPlant")
            .field("length", &self.length)
            .field("f_prime_0", &self.f_prime_0)
            .field("n", &self.n)
            .field("n_sim", &self.n_sim)
            .field("gamma", &self.gamma)
            .finish_non_exhaustive()
    }
}

impl SemilinearPlant {
    pub fn new<F>(length: f64, f_prime_0: f64, f: F, n: usize, n_sim: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidInput("L must be positive".into()));
        }
        if n == 0 || n_sim < n {
            return Err(Error::InvalidInput(format!("need N_sim >= n >= 1, got n = {n}, N_sim = {n_sim}")));
        }
        if f(0.0).abs() > 1e-12 {
            return Err(Error::NotEquilibrium { residual: f(0.0).abs() });
        }
        Ok(Self { length, f_prime_0, f: Arc::new(f), n, n_sim, gamma: None })
    }

    /// Linear nonlinearity `f(y) = c y`.
    pub fn linear(length: f64, c: f64, n: usize, n_sim: usize) -> Result<Self> {
        Self::new(length, c, move |y| c * y, n, n_sim)
    }

    /// Default `n`: every mode with `f'(0) − μ_j ≥ 0`, plus two.
    pub fn default_modes(length: f64, f_prime_0: f64) -> usize {
        (1..).take_while(|&j| f_prime_0 - (j as f64 * PI / length).powi(2) >= 0.0).count() + 2
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    fn mu(&self, j: usize) -> f64 {
        (j as f64 * PI / self.length).powi(2)
    }

    /// `λ_j = f'(0) − μ_j`, `j >= 1`.
    pub fn lambda(&self, j: usize) -> f64 {
        self.f_prime_0 - self.mu(j)
    }

    /// `∫₀ᴸ x e_j(x) dx` with `e_j = √(2/L) sin(jπx/L)`.
    pub fn moment(&self, j: usize) -> f64 {
        let l = self.length;
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        (2.0 / l).sqrt() * l * l * sign / (j as f64 * PI)
    }

    pub fn a_coeff(&self, j: usize) -> f64 {
        self.f_prime_0 / self.length * self.moment(j)
    }

    pub fn b_coeff(&self, j: usize) -> f64 {
        -self.moment(j) / self.length
    }

    /// `A_n`, `B_n` acting on `X_n = (u, z_1, …, z_n)`.
    pub fn reduced(&self, n: usize) -> (Matrix, Matrix) {
        let mut a = Matrix::zeros(n + 1, n + 1);
        let mut b = Matrix::zeros(n + 1, 1);
        b[(0, 0)] = 1.0;
        for j in 1..=n {
            a[(j, 0)] = self.a_coeff(j);
            a[(j, j)] = self.lambda(j);
            b[(j, 0)] = self.b_coeff(j);
        }
        (a, b)
    }

    /// `det(B_n, A_nB_n, …, A_nⁿB_n)` computed numerically and through
    /// `∏(a_j + λ_j b_j) · VdM(λ_1, …, λ_n)`.
    pub fn kalman_determinant(&self, n: usize) -> (f64, f64) {
        let (a, b) = self.reduced(n);
        let numeric = kalman_matrix(&a, &b).determinant();
        let mut formula: f64 = (1..=n).map(|j| self.a_coeff(j) + self.lambda(j) * self.b_coeff(j)).product();
        for j in 1..=n {
            for i in 1..j {
                formula *= self.lambda(j) - self.lambda(i);
            }
        }
        (numeric, formula)
    }
}

#[derive(Clone, Debug)]
pub struct SemilinearRun {
    /// `v = K_n X_n`, shape `1 x (n+1)`.
    pub k: Matrix,
    pub p: Matrix,
    pub gamma: f64,
    /// Smallest `γ` for which `V` is positive definite and strictly
    /// decreasing along the linearized truncated closed loop.
    pub gamma_min: f64,
    /// Closed-loop linearization on `(u, z_1, …, z_{N_sim})`.
    pub closed_loop: Matrix,
    /// States `(u, z_1, …, z_{N_sim})`.
    pub trajectory: Trajectory,
    pub v: Vec<f64>,
    pub placement_residual: f64,
}

impl SemilinearRun {
    pub fn max_v_increase(&self) -> f64 {
        self.v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn v_non_increasing(&self) -> bool {
        self.v.windows(2).all(|w| w[1] <= w[0] + 1e-14 * w[0].abs())
    }

    /// `(‖z(T)‖ + |u(T)|) / (‖z(0)‖ + |u(0)|)`.
    pub fn decay_ratio(&self) -> f64 {
        let size = |s: &Vector| s[0].abs() + s.rows(1, s.len() - 1).norm();
        size(self.trajectory.final_state()) / size(&self.trajectory.states[0])
    }

    pub fn closed_loop_eigenvalues(&self) -> Result<Vec<crate::numcore::Complex>> {
        eigenvalues(&self.closed_loop)
    }
}

struct Lyap {
    /// `γ`-free part `-½ diag(0, λ)` and the `X_n` block `P_n` embedded.
    lam: Matrix,
    p_embedded: Matrix,
}

impl Lyap {
    fn matrix(&self, gamma: f64) -> Matrix {
        &self.p_embedded * gamma + &self.lam
    }

    fn admissible(&self, gamma: f64, m: &Matrix) -> bool {
        let s = self.matrix(gamma);
        let rate = &s * m + m.transpose() * &s;
        let rate = (&rate + rate.transpose()) * 0.5;
        let s_min = s.symmetric_eigenvalues().min();
        let r_max = rate.symmetric_eigenvalues().max();
        s_min > 0.0 && r_max < 0.0
    }

    fn gamma_min(&self, m: &Matrix) -> Result<f64> {
        let mut hi = 1e-6;
        while !self.admissible(hi, m) {
            hi *= 2.0;
            if hi > 1e14 {
                return Err(Error::NoConvergence("no admissible Lyapunov weight γ".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.admissible(mid, m) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Finite-mode feedback `u' = v = K_n X_n` placing `A_n + B_n K_n` at
/// `(s+1)^{n+1}`, then the `N_sim`-mode Galerkin closed loop with the true
/// nonlinearity. `y0` holds orthonormal coefficients of `y(0) = z(0)`.
pub fn semilinear_stabilize(plant: &SemilinearPlant, y0: &Vector, t_sim: f64, steps: usize) -> Result<SemilinearRun> {
    let n = plant.n;
    let ns = plant.n_sim;
    if y0.len() > ns {
        return Err(Error::Dimension(format!("at most {ns} initial coefficients, got {}", y0.len())));
    }
    if !(t_sim > 0.0) || steps == 0 {
        return Err(Error::InvalidInput("need T_sim > 0 and steps >= 1".into()));
    }
    for j in 1..=n {
        let c = plant.a_coeff(j) + plant.lambda(j) * plant.b_coeff(j);
        if c.abs() < 1e-14 {
            return Err(Error::NotControllable { rank: j, dim: n + 1 });
        }
    }
    let (an, bn) = plant.reduced(n);
    let target = PolyCoeffs::from_real_roots(&vec![-1.0; n + 1]);
    // Repeated targets only pin the coefficients, so the check is loose.
    let gain = pole_place(&LtiSystem::new(an.clone(), bn.clone())?, &target, 1e-6)?;
    let k = gain.k;
    let p = lyapunov_solve(&(&an + &bn * &k))?;

    // Linear closed loop on W = (u, z_1..z_ns).
    let dim = ns + 1;
    let mut kw = Matrix::zeros(1, dim);
    kw.view_mut((0, 0), (1, n + 1)).copy_from(&k);
    let mut aw = Matrix::zeros(dim, dim);
    let mut bw = Matrix::zeros(dim, 1);
    bw[(0, 0)] = 1.0;
    for j in 1..=ns {
        aw[(j, 0)] = plant.a_coeff(j);
        aw[(j, j)] = plant.lambda(j);
        bw[(j, 0)] = plant.b_coeff(j);
    }
    let m = &aw + &bw * &kw;

    let mut p_embedded = Matrix::zeros(dim, dim);
    p_embedded.view_mut((0, 0), (n + 1, n + 1)).copy_from(&p);
    let lam = Matrix::from_fn(dim, dim, |i, j| if i == j && i > 0 { -0.5 * plant.lambda(i) } else { 0.0 });
    let lyap = Lyap { lam, p_embedded };
    let gamma_min = lyap.gamma_min(&m)?;
    let gamma = plant.gamma.unwrap_or_else(|| (10.0 * plant.f_prime_0.abs().max(1.0)).max(2.0 * gamma_min));
    let s = lyap.matrix(gamma);

    // Remainder r = f(y) − f'(0) y projected on e_j by Simpson in x.
    let l = plant.length;
    let nx = 16 * ns;
    let xs = uniform_grid(0.0, l, nx);
    let hx = l / nx as f64;
    let norm = (2.0 / l).sqrt();
    let modes: Vec<Vec<f64>> = (1..=ns).map(|j| xs.iter().map(|x| norm * (j as f64 * PI * x / l).sin()).collect()).collect();
    let remainder = |w: &Vector| -> Result<Vector> {
        let r: Vec<f64> = (0..xs.len())
            .map(|i| {
                let y = xs[i] / l * w[0] + (0..ns).map(|j| w[j + 1] * modes[j][i]).sum::<f64>();
                (plant.f)(y) - plant.f_prime_0 * y
            })
            .collect();
        let mut out = Vector::zeros(dim);
        for j in 0..ns {
            let prod: Vec<f64> = r.iter().zip(&modes[j]).map(|(a, b)| a * b).collect();
            out[j + 1] = simpson(&prod, hx)?;
        }
        Ok(out)
    };

    // Lawson RK4: the linear closed loop is propagated exactly.
    let h = t_sim / steps as f64;
    let e_half = expm(&(&m * (0.5 * h)))?;
    let e_full = &e_half * &e_half;
    let times = uniform_grid(0.0, t_sim, steps);
    let mut w = Vector::zeros(dim);
    w.rows_mut(1, y0.len()).copy_from(y0);
    let mut states = Vec::with_capacity(steps + 1);
    let mut v = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        v.push((w.transpose() * &s * &w)[(0, 0)]);
        states.push(w.clone());
        if i == steps {
            break;
        }
        let k1 = remainder(&w)?;
        let ew = &e_half * &w;
        let k2 = remainder(&(&ew + &e_half * &k1 * (0.5 * h)))?;
        let k3 = remainder(&(&ew + &k2 * (0.5 * h)))?;
        let k4 = remainder(&(&e_full * &w + &e_half * &k3 * h))?;
        w = &e_full * &w + (&e_full * k1 + &e_half * (k2 + k3) * 2.0 + k4) * (h / 6.0);
        if !w.iter().all(|x| x.is_finite()) || w.amax() > 1e8 {
            return Err(Error::IntegrationBlowup { time: times[i + 1] });
        }
    }

    Ok(SemilinearRun {
        k,
        p,
        gamma,
        gamma_min,
        closed_loop: m,
        trajectory: Trajectory { times, states },
        v,
        placement_residual: gain.residual,
    })
}
