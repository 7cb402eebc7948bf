//! Numerical toolkit for controllability analysis, feedback stabilization,
//! optimal control by shooting, and spectral control of 1-D wave and heat
//! equations.
//!
//! Everything is dense `f64` linear algebra on top of `nalgebra`. The hot
//! loops (quadrature nodes, trajectory families) go through
//! [`numcore::parallel`], which runs on rayon when the `parallel` feature is
//! on and degrades to a plain loop otherwise. Reductions are always summed
//! sequentially in node order, so results are bit-identical either way.

pub mod control;
pub mod error;
pub mod lincontrol;
pub mod numcore;
pub mod optctrl;
pub mod specpde;
pub mod stabilize;

pub use control::{ControlLaw, SampledControl};
pub use error::{Error, Result};
pub use numcore::{Matrix, Vector};
