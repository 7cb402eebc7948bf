//! Optimal control: finite-horizon LQ through the Riccati equation,
//! tracking gains, and single shooting on the maximum-principle
//! boundary value problem with pluggable Hamiltonian maximizers.

pub mod examples;
mod lq;
mod pmp;

pub use lq::{
    evaluate_open_loop_costs, lq_closed_loop_cost, lq_feedback, open_loop_cost, riccati_rhs, riccati_solve, tracking_gains,
    LqProblem, LqRun, OpenLoop, RiccatiSolution, TrackingSolution,
};
pub use pmp::{
    check_extremal, hamiltonian_maximizer_ball, hamiltonian_maximizer_box, hamiltonian_maximizer_unconstrained, pmp_shoot,
    ControlAffine, DynFn, Extremal, ExtremalDiagnostics, Horizon, Maximizer, OcProblem, RunningCostFn, ShootGuess, ShootOptions,
    TerminalCondition, TerminalCost,
};
