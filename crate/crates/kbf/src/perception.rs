//! Static perception error: the planner and controller see displaced,
//! resized obstacles while collisions are judged against the truth.

use std::f64::consts::PI;

use kbf_core::{Obstacle, Scenario};
use rand::Rng;

/// Smallest radius a perturbed obstacle may shrink to (m).
pub const MIN_RADIUS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct PerceivedScenario {
    pub truth: Scenario,
    pub perceived: Scenario,
    /// Indices of obstacles whose perturbed radius was clamped to
    /// [`MIN_RADIUS`].
    pub clamped: Vec<usize>,
}

impl PerceivedScenario {
    pub fn warnings(&self) -> impl Iterator<Item = String> + '_ {
        self.clamped.iter().map(|&i| {
            format!("obstacle {i}: perturbed radius clamped to {MIN_RADIUS} m")
        })
    }
}

/// Moves every obstacle center `pos_err` meters in a uniformly random
/// direction and adds a uniform offset in `[-radius_err, radius_err]` to its
/// radius. Zero errors leave the scenario unchanged and draw nothing from
/// `rng`.
///
/// # Panics
/// If either error is negative or not finite.
pub fn inject_perception_error<R: Rng + ?Sized>(
    s: &Scenario,
    pos_err: f64,
    radius_err: f64,
    rng: &mut R,
) -> PerceivedScenario {
    assert!(pos_err.is_finite() && pos_err >= 0.0, "pos_err must be >= 0");
    assert!(radius_err.is_finite() && radius_err >= 0.0, "radius_err must be >= 0");
    let mut perceived = s.clone();
    let mut clamped = Vec::new();
    for (i, o) in perceived.obstacles.iter_mut().enumerate() {
        *o = perturb(o, pos_err, radius_err, rng);
        if o.r < MIN_RADIUS {
            o.r = MIN_RADIUS;
            clamped.push(i);
        }
    }
    PerceivedScenario {
        truth: s.clone(),
        perceived,
        clamped,
    }
}

fn perturb<R: Rng + ?Sized>(o: &Obstacle, pos_err: f64, radius_err: f64, rng: &mut R) -> Obstacle {
    let mut out = *o;
    if pos_err > 0.0 {
        let phi = rng.gen_range(-PI..PI);
        out.x += pos_err * phi.cos();
        out.y += pos_err * phi.sin();
    }
    if radius_err > 0.0 {
        out.r += rng.gen_range(-radius_err..=radius_err);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use kbf_core::{Bounds, State};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scenario() -> Scenario {
        Scenario::new(
            State::new(0.0, 0.0, 0.0, 0.0),
            State::new(5.0, 0.0, 0.0, 0.0),
            vec![Obstacle::new(2.0, 1.0, 0.3), Obstacle::new(3.0, -1.0, 0.1)],
            Bounds::new(-1.0, 6.0, -3.0, 3.0),
        )
    }

    #[test]
    fn zero_error_is_identity() {
        let s = scenario();
        let p = inject_perception_error(&s, 0.0, 0.0, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(p.perceived, s);
        assert_eq!(p.truth, s);
        assert!(p.clamped.is_empty());
    }

    #[test]
    fn centers_move_exactly_pos_err() {
        let s = scenario();
        for seed in 0..50 {
            let p = inject_perception_error(&s, 0.5, 0.0, &mut ChaCha8Rng::seed_from_u64(seed));
            for (t, q) in s.obstacles.iter().zip(&p.perceived.obstacles) {
                let d = (q.x - t.x).hypot(q.y - t.y);
                assert!((d - 0.5).abs() < 1e-12);
                assert_eq!(q.r, t.r);
            }
        }
    }

    #[test]
    fn radius_stays_positive() {
        let s = scenario();
        let mut saw_clamp = false;
        for seed in 0..200 {
            let p = inject_perception_error(&s, 0.0, 0.25, &mut ChaCha8Rng::seed_from_u64(seed));
            for (t, q) in s.obstacles.iter().zip(&p.perceived.obstacles) {
                assert!(q.r > 0.0);
                assert!(q.r <= t.r + 0.25);
            }
            saw_clamp |= !p.clamped.is_empty();
            assert_eq!(p.warnings().count(), p.clamped.len());
        }
        assert!(saw_clamp, "the 0.1 m obstacle should sometimes be clamped");
    }
}
