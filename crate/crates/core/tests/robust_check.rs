#[path = "support/oracles.rs"]
mod oracles;

use kbf_core::safety::{kbf_check, kbf_value, robust_kbf_check, robust_kbf_value, sample_control};
use kbf_core::{CbfParams, Control, Obstacle, RobotParams, State, UncertaintyBounds};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tuple(rng: &mut ChaCha8Rng) -> (State, Control, Obstacle, CbfParams, UncertaintyBounds) {
    let robot = RobotParams::default();
    let z = State::new(
        rng.gen_range(-3.0..3.0),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        rng.gen_range(0.0..robot.v_max),
    );
    let u = sample_control(rng, &robot);
    let o = Obstacle::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.1..1.0));
    let cbf = CbfParams {
        gamma1: rng.gen_range(0.5..6.0),
        gamma2: rng.gen_range(0.5..6.0),
    };
    let bounds = UncertaintyBounds::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..0.9));
    (z, u, o, cbf, bounds)
}

#[test]
fn analytic_worst_case_matches_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..1000 {
        let (z, u, o, cbf, bounds) = random_tuple(&mut rng);
        let analytic = robust_kbf_value(&z, &u, &o, o.r, &cbf, &bounds);
        let grid = oracles::grid_worst(&z, &u, [o.x, o.y, o.r], (cbf.gamma1, cbf.gamma2), &bounds, 21);
        // The condition is affine in the perturbation, so the minimum sits on
        // a box vertex, which the grid contains.
        let tol = 1e-9 * (1.0 + grid.abs());
        assert!((analytic - grid).abs() <= tol, "tuple {k}: {analytic} vs {grid}");
    }
}

#[test]
fn nominal_value_matches_first_principles() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let (z, u, o, cbf, _) = random_tuple(&mut rng);
        let v = kbf_value(&z, &u, &o, o.r, &cbf);
        let expect = oracles::perturbed_condition(&z, &u, [o.x, o.y, o.r], (cbf.gamma1, cbf.gamma2), [0.0; 2], 0.0);
        assert!((v - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
    }
}

#[test]
fn robust_pass_set_nests_in_nominal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut robust_passes = 0;
    let mut violations = 0;
    for _ in 0..10_000 {
        let (z, u, o, cbf, bounds) = random_tuple(&mut rng);
        if robust_kbf_check(&z, &u, &o, o.r, &cbf, &bounds).passed() {
            robust_passes += 1;
            if !kbf_check(&z, &u, &o, o.r, &cbf).passed() {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0);
    assert!(robust_passes > 1000, "sample should exercise the pass set");
}

proptest! {
    #[test]
    fn zero_bounds_reproduce_nominal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (z, u, o, cbf, _) = random_tuple(&mut rng);
        let nominal = kbf_value(&z, &u, &o, o.r, &cbf);
        let robust = robust_kbf_value(&z, &u, &o, o.r, &cbf, &UncertaintyBounds::ZERO);
        prop_assert_eq!(nominal.to_bits(), robust.to_bits());
    }

    #[test]
    fn worst_case_is_monotone_in_bounds(seed in any::<u64>(), s in 1.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (z, u, o, cbf, b) = random_tuple(&mut rng);
        let wider = UncertaintyBounds::new(b.delta1_max * s, (b.delta2_max * s).min(0.99));
        let v = robust_kbf_value(&z, &u, &o, o.r, &cbf, &b);
        let w = robust_kbf_value(&z, &u, &o, o.r, &cbf, &wider);
        prop_assert!(w <= v + 1e-12 * (1.0 + v.abs()));
    }
}
