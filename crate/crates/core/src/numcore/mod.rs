//! Dense numerical primitives: matrix exponential, RK4, transition matrices,
//! SVD rank, Simpson quadrature and the parallel map used by hot loops.

mod expm;
mod linalg;
mod ode;
pub mod parallel;
mod quadrature;

pub use expm::expm;
pub use linalg::eigenvalues;
pub use linalg::{characteristic_polynomial, numerical_rank, singular_values, DEFAULT_RANK_TOL};
pub use ode::{integrate, rk4_step, transition_matrix, uniform_grid, OdeProblem, Trajectory};
pub use parallel::Execution;
pub use quadrature::{simpson, simpson_matrices, simpson_vectors};

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;
pub type Complex = num_complex::Complex<f64>;
