use std::sync::Arc;

use ctrlkit::lincontrol::{LinearDynamics, LtiSystem};
use ctrlkit::numcore::{Execution, Matrix, Trajectory, Vector};
use ctrlkit::optctrl::examples::*;
use ctrlkit::optctrl::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn guess(p: &[f64], tf: Option<f64>) -> ShootGuess {
    ShootGuess { p_init: v(p), tf, abnormal: false }
}

/// Best one-switch bang-bang time to the origin for x'' = u, |u| <= 1, by a
/// scan over the first arc length refined by bisection on the position miss.
fn one_switch_oracle(x1: f64, x2: f64) -> f64 {
    let mut best = f64::INFINITY;
    for sigma in [-1.0, 1.0] {
        // after the first arc of length s, the second arc (−σ) must stop at 0
        let miss = |s: f64| -> Option<(f64, f64)> {
            let (p, w) = (x1 + x2 * s + 0.5 * sigma * s * s, x2 + sigma * s);
            let t2 = w * sigma;
            (t2 >= 0.0).then(|| (p + w * t2 - 0.5 * sigma * t2 * t2, s + t2))
        };
        let n = 20000;
        let hmax = 10.0;
        for i in 0..n {
            let (a, b) = (hmax * i as f64 / n as f64, hmax * (i + 1) as f64 / n as f64);
            let (Some((ma, _)), Some((mb, _))) = (miss(a), miss(b)) else { continue };
            if ma == 0.0 {
                best = best.min(miss(a).unwrap().1);
            } else if ma * mb < 0.0 {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    match miss(mid) {
                        Some((mm, _)) if (mm > 0.0) == (ma > 0.0) => lo = mid,
                        _ => hi = mid,
                    }
                }
                best = best.min(miss(0.5 * (lo + hi)).unwrap().1);
            }
        }
    }
    best
}

#[test]
fn oracle_agrees_with_closed_form() {
    for (a, b) in [(1.0, 0.0), (1.0, 0.5), (-0.5, 1.0), (2.0, -1.0)] {
        assert!((one_switch_oracle(a, b) - double_integrator_min_time_closed_form(a, b)).abs() < 1e-8, "{a}, {b}");
    }
}

#[test]
fn double_integrator_min_time_is_bang_bang() {
    for (x0, g) in [((1.0, 0.0), guess(&[-1.2, -0.9], Some(1.8))), ((1.0, 0.5), guess(&[-0.9, -1.4], Some(2.5)))] {
        let prob = double_integrator_min_time(v(&[x0.0, x0.1])).unwrap();
        let e = pmp_shoot(&prob, &g, &ShootOptions::default()).unwrap();
        let d = check_extremal(&e, &prob);
        assert!(d.switches.unwrap() <= 1);
        assert!(e.controls.iter().all(|u| (u[0].abs() - 1.0).abs() < 1e-12 || u[0] == 0.0));
        assert!((e.tf - one_switch_oracle(x0.0, x0.1)).abs() < 1e-4, "tf = {}", e.tf);
        assert!(d.hamiltonian_deviation.unwrap() < 1e-5);
        assert!(d.final_hamiltonian.unwrap().abs() < 1e-6);
    }
}

#[test]
fn brachistochrone_time() {
    let g = 9.81;
    let prob = brachistochrone(1.0, g).unwrap();
    let e = pmp_shoot(&prob, &guess(&[0.3, 0.1], Some(0.7)), &ShootOptions::default()).unwrap();
    let want = (2.0 * std::f64::consts::PI / g).sqrt();
    assert!((e.tf - want).abs() / want < 1e-4, "tf = {}", e.tf);
    let d = check_extremal(&e, &prob);
    assert!(d.hamiltonian_deviation.unwrap() < 1e-5);
    assert!(d.final_hamiltonian.unwrap().abs() < 1e-6);
}

#[test]
fn zermelo_heading_law() {
    let speed = 0.5;
    let prob = zermelo_min_drift(speed, 1.0).unwrap();
    let e = pmp_shoot(&prob, &guess(&[-1.0, 1.0], Some(1.0)), &ShootOptions::default()).unwrap();
    let worst = e
        .state
        .states
        .iter()
        .zip(&e.controls)
        .map(|(x, w)| (w[0] + speed / zermelo_current(x[1])).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "cos u error {worst}");
    assert!((e.state.final_state()[1] - 1.0).abs() < 1e-8);
    let d = check_extremal(&e, &prob);
    assert!(d.hamiltonian_deviation.unwrap() < 1e-5);
    assert!(d.final_hamiltonian.unwrap().abs() < 1e-6);
}

#[test]
fn predator_prey_switches_once() {
    let (a, b, c, umax, horizon) = (1.0, 1.0, 1.0, 1.0, 2.0);
    let prob = predator_prey(a, b, c, umax, v(&[4.0, 0.2]), horizon).unwrap();
    let e = pmp_shoot(&prob, &guess(&[-3.0, 5.0], None), &ShootOptions::default()).unwrap();
    let d = check_extremal(&e, &prob);
    assert!(d.switches.unwrap() <= 1);
    let xt = e.state.final_state()[0];
    // x p_x is constant and equal to −x(T)
    for (x, p) in e.state.states.iter().zip(&e.adjoint.states) {
        assert!((x[0] * p[0] + xt).abs() < 1e-6 * xt.max(1.0));
    }
    // the control ends at zero
    assert_eq!(e.controls.last().unwrap()[0], 0.0);
    let threshold = c / (b * (1.0 - (-c * horizon).exp()));
    if xt > threshold {
        let t1 = horizon + (1.0 - c / (b * xt)).ln() / c;
        let on = e.state.times.iter().zip(&e.controls).filter(|(_, u)| u[0] > 0.5).map(|(t, _)| *t).fold(0.0, f64::max);
        assert!((on - t1).abs() < 2.0 * horizon / 2000.0 + 1e-6, "switch {on} vs {t1}");
    }
}

fn scalar_lq(horizon: f64) -> LqProblem {
    let sys: Arc<dyn LinearDynamics> = Arc::new(LtiSystem::from_rows(&[&[0.0]], &[&[1.0]]).unwrap());
    LqProblem::constant(sys, Matrix::identity(1, 1), Matrix::identity(1, 1), Matrix::zeros(1, 1), horizon).unwrap()
}

#[test]
fn closed_loop_beats_open_loop_family() {
    let p = scalar_lq(2.0);
    let sol = Arc::new(riccati_solve(&p, 2000).unwrap());
    for (t, e) in sol.times.iter().zip(&sol.e) {
        assert!((e[(0, 0)] + (2.0 - t).tanh()).abs() < 1e-8);
    }
    let law = lq_feedback(sol.clone(), &p);
    let x0 = v(&[1.0]);
    let run = lq_closed_loop_cost(&p, &law, &x0, 2000).unwrap();
    assert!((run.cost + sol.e[0][(0, 0)]).abs() < 1e-6);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let family: Vec<OpenLoop> = (0..200)
        .map(|_| {
            let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.5..1.5)).collect();
            Arc::new(move |t: f64| Vector::from_element(1, c[0] + c[1] * t + c[2] * (3.0 * t).sin() + c[3] * (-t).exp())) as OpenLoop
        })
        .collect();
    let costs = evaluate_open_loop_costs(&p, &family, &x0, 400, Execution::Auto).unwrap();
    assert!(costs.iter().all(|&c| c > run.cost));
    let seq = evaluate_open_loop_costs(&p, &family, &x0, 400, Execution::Sequential).unwrap();
    assert_eq!(costs, seq);
}

#[test]
fn tracking_follows_reference() {
    // x' = u tracking ξ(t) = sin t with heavy state weight
    let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
    let xi = Trajectory { states: times.iter().map(|t| v(&[t.sin()])).collect(), times: times.clone() };
    let w = Matrix::from_element(1, 1, 100.0);
    let sol = tracking_gains(|_t: f64, _x: &Vector, u: &Vector| u.clone(), &xi, 1, &w, &Matrix::identity(1, 1), &Matrix::zeros(1, 1)).unwrap();
    let mut x = v(&[0.0]);
    let h = 0.001;
    let mut worst = 0.0f64;
    for i in 0..3000 {
        let t = i as f64 * h;
        let u = sol.law.eval(t, &x).unwrap();
        x += u * h;
        if t > 1.0 {
            worst = worst.max((x[0] - (t + h).sin()).abs());
        }
    }
    assert!(worst < 0.05, "tracking error {worst}");
}
