//! Controllability of linear systems (time-invariant and time-varying),
//! Gramians with minimal-energy steering, and Lie-bracket rank tests.

mod gramian;
mod kalman;
mod lie;
mod ltv;
mod system;

pub use gramian::{gramian, gramian_with, hum_control_finite, hum_control_finite_with, GramianOptions, GramianReport, HumControl};
pub use kalman::{
    brunovski_form, controllable_decomposition, hautus_test, kalman_matrix, kalman_test, BrunovskiForm,
    ControllableDecomposition, HautusReport, KalmanReport,
};
pub use lie::{larc_rank, lie_bracket, LarcReport, VectorField};
pub use ltv::{ltv_kalman_blocks, ltv_kalman_test, DerivativePolicy, LtvKalmanReport};
pub use system::{LinearDynamics, LtiSystem, LtvSystem, MatrixFn, VectorFn};
