#![allow(dead_code)]

// Cluttered corridor layouts used by the planner and follower tests.

use kbf_core::{Bounds, CbfParams, Obstacle, Scenario, State};

pub fn corridor(obstacles: &[(f64, f64, f64)]) -> Scenario {
    let mut s = Scenario::new(
        State::new(0.5, 2.0, 0.0, 0.0),
        State::new(4.5, 2.0, 0.0, 0.0),
        obstacles.iter().map(|&(x, y, r)| Obstacle::new(x, y, r)).collect(),
        Bounds::new(0.0, 5.0, 0.0, 4.0),
    );
    s.cbf = CbfParams {
        gamma1: 5.0,
        gamma2: 5.0,
    };
    s.planner.dt = 1.0;
    s.planner.qp_substeps = 50;
    s
}

pub fn four_obstacles() -> Scenario {
    corridor(&[(1.8, 2.6, 0.3), (2.2, 1.2, 0.3), (3.4, 2.0, 0.25), (3.0, 3.3, 0.2)])
}

pub fn three_obstacles() -> Scenario {
    corridor(&[(2.0, 2.5, 0.35), (2.4, 1.2, 0.25), (3.5, 1.8, 0.3)])
}
