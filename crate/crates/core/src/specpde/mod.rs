//! Fourier-sine realizations on `(0, L)`: heat and wave evolution,
//! observability functionals, boundary HUM for the wave equation, moment
//! method for the heat equation, damping experiments and finite-mode
//! stabilization of a semilinear heat equation.

mod basis;
mod damping;
mod hum;
mod moment;
mod observe;
mod semilinear;

pub use basis::{heat_evolve, optimal_set, product_mass, sin2_lower_bound, sin2_mass, wave_evolve, IntervalUnion, SineBasis, WaveState};
pub use damping::{damping_decay_experiment, damping_matrix, DampingOptions, DampingReport};
pub use hum::{hum_wave_boundary, wave_boundary_gramian, Pivot, WaveGramian, WaveHum, WaveHumOptions};
pub use moment::{biorthogonal_family, moment_heat_control, BiorthogonalFamily, MomentControl, DEFAULT_MAX_COND};
pub use observe::{boundary_observability_constant, boundary_observation_energy, internal_wave_observation};
pub use semilinear::{semilinear_stabilize, SemilinearPlant, SemilinearRun};
