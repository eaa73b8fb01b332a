use std::f64::consts::PI;

use kbf_core::dynamics::{
    integrate_step, io_linearize, io_linearize_raw, pseudo_control, Integrator, PseudoControl,
    Regularization,
};
use kbf_core::{Control, RobotParams, State};
use proptest::prelude::*;

/// Exact state after `t` seconds at constant speed and curvature.
fn arc(z: &State, c: f64, t: f64) -> State {
    let th = z.theta + c * z.v * t;
    State::new(
        z.x + (th.sin() - z.theta.sin()) / c,
        z.y - (th.cos() - z.theta.cos()) / c,
        th,
        z.v,
    )
}

fn pos_err(a: &State, b: &State) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

fn robot() -> RobotParams {
    RobotParams::default()
}

#[test]
fn rk4_step_matches_circular_arc() {
    let p = robot();
    let cmax = p.max_curvature();
    let mut worst = 0.0f64;
    for (k, frac) in [1.0, 0.5, -0.7, 0.2, -1.0].into_iter().enumerate() {
        let z = State::new(0.3 * k as f64, -0.2, -2.0 + k as f64, 1.2);
        let u = Control::new(frac * cmax, 0.0);
        let next = integrate_step(&z, &u, 0.1, &p, Integrator::Rk4);
        let exact = arc(&z, u.c, 0.1);
        worst = worst.max(pos_err(&next, &exact));
        let dth = (next.theta - exact.theta + PI).rem_euclid(2.0 * PI) - PI;
        assert!(dth.abs() <= 1e-12);
    }
    assert!(worst <= 1e-6, "single-step error {worst:e}");
}

#[test]
fn halving_the_step_cuts_error_eightfold() {
    let p = robot();
    let z = State::new(0.0, 0.0, 0.4, 1.2);
    let u = Control::new(p.max_curvature(), 0.0);
    let exact = arc(&z, u.c, 0.1);
    let one = integrate_step(&z, &u, 0.1, &p, Integrator::Rk4);
    let half = integrate_step(&z, &u, 0.05, &p, Integrator::Rk4);
    let two = integrate_step(&half, &u, 0.05, &p, Integrator::Rk4);
    let ratio = pos_err(&one, &exact) / pos_err(&two, &exact);
    assert!(ratio >= 8.0, "improvement {ratio}");
}

#[test]
fn euler_is_first_order() {
    let p = robot();
    let z = State::new(0.0, 0.0, 0.0, 1.0);
    let u = Control::new(2.0, 0.0);
    let exact = arc(&z, u.c, 0.1);
    let one = integrate_step(&z, &u, 0.1, &p, Integrator::Euler);
    let mut two = z;
    for _ in 0..2 {
        two = integrate_step(&two, &u, 0.05, &p, Integrator::Euler);
    }
    let ratio = pos_err(&one, &exact) / pos_err(&two, &exact);
    assert!((1.5..3.0).contains(&ratio), "ratio {ratio}");
}

proptest! {
    #[test]
    fn integration_keeps_state_invariants(
        x in -10.0f64..10.0, y in -10.0f64..10.0, th in -PI..PI, v in 0.0f64..1.2,
        cf in -1.0f64..1.0, a in -3.0f64..3.0, dt in 0.001f64..2.0,
    ) {
        let p = robot();
        let z = State::new(x, y, th, v);
        let n = integrate_step(&z, &Control::new(cf * p.max_curvature(), a), dt, &p, Integrator::Rk4);
        prop_assert!(n.theta > -PI && n.theta <= PI);
        prop_assert!(n.v >= 0.0 && n.v <= p.v_max);
    }

    #[test]
    fn linearization_inverts_pseudo_control(
        th in -PI..PI, v in 0.1f64..1.2, c in -2.0f64..2.0, a in -1.0f64..1.0,
    ) {
        let z = State::new(0.0, 0.0, th, v);
        let mu = pseudo_control(&z, &Control::new(c, a));
        let u = io_linearize_raw(&z, &mu, Regularization::default()).unwrap();
        prop_assert!((u.c - c).abs() <= 1e-9 && (u.a - a).abs() <= 1e-9);
    }

    #[test]
    fn linearized_input_is_admissible(
        th in -PI..PI, v in 0.0f64..1.2, m1 in -50.0f64..50.0, m2 in -50.0f64..50.0,
    ) {
        let p = robot();
        let z = State::new(0.0, 0.0, th, v);
        let u = io_linearize(&z, &PseudoControl([m1, m2]), &p, Regularization::default()).unwrap();
        prop_assert!(u.c.abs() <= p.max_curvature() + 1e-12);
        prop_assert!(u.a.abs() <= p.a_max + 1e-12);
    }
}
