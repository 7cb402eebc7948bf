//! Stability criteria and stabilizing feedback: Routh and Hurwitz tests,
//! pole placement, Lyapunov equations, linearization, Jurdjevic–Quinn
//! damping feedback and closed-loop simulation.

mod jq;
mod lyapunov;
mod placement;
mod poly;

pub use jq::{jurdjevic_quinn_feedback, simulate_closed_loop, ClosedLoopRun, ControlAffineSystem, Field};
pub use lyapunov::{linearize, lyapunov_solve};
pub use placement::{pole_place, pole_place_roots, FeedbackGain};
pub use poly::{hurwitz, routh, HurwitzReport, PolyCoeffs, RouthReport};
