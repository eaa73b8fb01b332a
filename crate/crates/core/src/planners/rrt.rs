use alloc::vec::Vec;

use rand::Rng;

use super::{finish, PlanError, Tree};
use crate::math::{self, dist2, dot2};
use crate::model::{Obstacle, PlanResult, RobotParams, Scenario, State, Waypoint};

/// Distance from point `q` to the closed segment `p0 p1`.
pub fn segment_distance(p0: [f64; 2], p1: [f64; 2], q: [f64; 2]) -> f64 {
    let d = [p1[0] - p0[0], p1[1] - p0[1]];
    let len2 = dot2(d, d);
    let t = if len2 > 0.0 {
        (dot2([q[0] - p0[0], q[1] - p0[1]], d) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let c = [p0[0] + t * d[0], p0[1] + t * d[1]];
    math::sqrt(dist2(c, q))
}

/// `true` iff the closed segment comes strictly closer than `radii[i]` to
/// the center of `obstacles[i]` for some `i`. Touching the boundary is safe.
pub fn segment_collision(p0: [f64; 2], p1: [f64; 2], obstacles: &[Obstacle], radii: &[f64]) -> bool {
    debug_assert_eq!(obstacles.len(), radii.len());
    obstacles
        .iter()
        .zip(radii)
        .any(|(o, &r)| segment_distance(p0, p1, o.center()) < r)
}

pub(crate) fn sample_point<R: Rng + ?Sized>(rng: &mut R, s: &Scenario) -> [f64; 2] {
    let b = &s.bounds;
    if s.planner.goal_bias > 0.0 && rng.gen_bool(s.planner.goal_bias) {
        return s.goal.position();
    }
    [rng.gen_range(b.xmin..=b.xmax), rng.gen_range(b.ymin..=b.ymax)]
}

/// Geometric RRT. Extends the nearest node by `step_size` toward uniform
/// samples and connects straight to the goal once it lies within one step
/// along a free segment.
///
/// Waypoints are timed for traversal at half the robot's top speed, with
/// heading taken from the outgoing segment; they carry no controls.
pub fn plan_rrt<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<PlanResult, PlanError> {
    let radii: Vec<f64> = s.combined_radii();
    let goal = s.goal.position();
    let step = s.planner.step_size;
    let mut tree = Tree::new(s.start);

    let try_connect = |tree: &mut Tree, from: usize| -> Option<usize> {
        let p = tree.node(from).state.position();
        let d = math::sqrt(dist2(p, goal));
        if d <= s.planner.goal_tolerance {
            return Some(from);
        }
        if d <= step && !segment_collision(p, goal, &s.obstacles, &radii) {
            return Some(tree.add(State::new(goal[0], goal[1], 0.0, 0.0), from, None));
        }
        None
    };

    if let Some(leaf) = try_connect(&mut tree, 0) {
        return Ok(geometric_result(&tree, leaf, &s.robot, 0));
    }
    for iter in 0..s.planner.max_iters {
        let q = sample_point(rng, s);
        let near = tree.nearest(q);
        let p = tree.node(near).state.position();
        let d = math::sqrt(dist2(p, q));
        if d == 0.0 {
            continue;
        }
        let h = step.min(d) / d;
        let new = [p[0] + h * (q[0] - p[0]), p[1] + h * (q[1] - p[1])];
        if !s.bounds.contains(new) || segment_collision(p, new, &s.obstacles, &radii) {
            continue;
        }
        let id = tree.add(State::new(new[0], new[1], 0.0, 0.0), near, None);
        if let Some(leaf) = try_connect(&mut tree, id) {
            return Ok(geometric_result(&tree, leaf, &s.robot, iter + 1));
        }
    }
    Err(PlanError::NoPath {
        iterations: s.planner.max_iters,
    })
}

fn geometric_result(tree: &Tree, leaf: usize, robot: &RobotParams, iterations: usize) -> PlanResult {
    let path = tree.path_to(leaf);
    let cruise = 0.5 * robot.v_max;
    let pts: Vec<[f64; 2]> = path.iter().map(|&i| tree.node(i).state.position()).collect();
    let mut waypoints = Vec::with_capacity(path.len());
    let mut t = 0.0;
    let mut heading = tree.node(path[0]).state.theta;
    for (k, &i) in path.iter().enumerate() {
        if k > 0 {
            t += math::sqrt(dist2(pts[k - 1], pts[k])) / cruise;
        }
        if let Some(next) = pts.get(k + 1) {
            heading = math::atan2(next[1] - pts[k][1], next[0] - pts[k][0]);
        }
        let v = if k + 1 == path.len() { 0.0 } else { cruise };
        waypoints.push(Waypoint {
            t,
            state: State::new(pts[k][0], pts[k][1], heading, v),
            control: None,
            node: i,
        });
    }
    // The root keeps the scenario's start state exactly.
    waypoints[0].state = tree.node(path[0]).state;
    finish(tree, waypoints, iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::combined_radius;

    #[test]
    fn segment_examples() {
        let obs = [Obstacle::new(2.0, 0.5, 1.0)];
        assert!(segment_collision([0.0, 0.0], [4.0, 0.0], &obs, &[1.0]));
        let obs = [Obstacle::new(2.0, 2.0, 1.0)];
        assert!(!segment_collision([0.0, 0.0], [4.0, 0.0], &obs, &[1.0]));
        let obs = [Obstacle::new(1.0, 0.0, 1.0)];
        assert!(!segment_collision([0.0, 0.0], [0.0, 0.0], &obs, &[1.0]));
    }

    #[test]
    fn segment_distance_uses_endpoints_outside_projection() {
        assert!((segment_distance([0.0, 0.0], [1.0, 0.0], [2.0, 1.0]) - 2f64.sqrt()).abs() < 1e-15);
        assert!((segment_distance([0.0, 0.0], [1.0, 0.0], [0.5, -3.0]) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn combined_radius_is_used() {
        let robot = RobotParams::default();
        let o = Obstacle::new(0.0, 1.0, 0.8);
        let r = combined_radius(&o, &robot);
        assert!(segment_collision([-1.0, 0.0], [1.0, 0.0], &[o], &[r]));
        assert!(!segment_collision([-1.0, 0.0], [1.0, 0.0], &[o], &[o.r]));
    }
}
