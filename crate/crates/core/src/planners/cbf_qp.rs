//! RRT baseline that steers each extension by simulating the closed-loop
//! CLF-CBF-QP controller.
//!
//! Reconstruction choices (not fixed by the method being compared against):
//! an extension lasts one planner `dt`, split into `qp_substeps` controller
//! ticks; the steering reference leaves the nearest node toward the sample
//! in a straight line at `cruise_fraction * v_max`; the controller is the
//! same actuator-limited one the path follower uses; an extension is kept
//! only if every barrier stays nonnegative at every tick and the endpoint is
//! inside the workspace.

use alloc::vec::Vec;

use rand::Rng;

use super::rrt::sample_point;
use super::{timed_result, PlanError, Tree};
use crate::control::{self, ClfCbfConfig, ClfData, InputLimits, Reference};
use crate::dynamics::{self, integrate_step, Integrator, Regularization, TransformedState};
use crate::math::{self, dist2};
use crate::model::{PlanResult, Scenario, State};
use crate::qp::QpSolver;
use crate::safety::barrier_value;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbfQpSteering {
    pub substeps: usize,
    pub cruise_fraction: f64,
}

impl CbfQpSteering {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            substeps: s.planner.qp_substeps,
            cruise_fraction: 1.0,
        }
    }
}

struct Steer<'a> {
    s: &'a Scenario,
    radii: Vec<f64>,
    data: ClfData,
    cfg: ClfCbfConfig,
    solver: QpSolver,
    steering: CbfQpSteering,
}

impl Steer<'_> {
    /// Runs the controller from `z` toward `target`; `None` if the QP fails
    /// or a barrier goes negative.
    fn extend(&mut self, z: State, target: [f64; 2]) -> Option<State> {
        let p0 = z.position();
        let d = math::sqrt(dist2(p0, target));
        if d == 0.0 {
            return None;
        }
        let dir = [(target[0] - p0[0]) / d, (target[1] - p0[1]) / d];
        let speed = self.steering.cruise_fraction * self.s.robot.v_max;
        let h = self.s.planner.dt / self.steering.substeps as f64;
        let mut cur = z;
        for j in 0..self.steering.substeps {
            let tau = j as f64 * h;
            let reference = Reference {
                state: TransformedState {
                    position: [p0[0] + dir[0] * speed * tau, p0[1] + dir[1] * speed * tau],
                    velocity: [dir[0] * speed, dir[1] * speed],
                },
                accel: [0.0, 0.0],
            };
            let out = control::clf_cbf_qp_control(
                &cur,
                &reference,
                &self.s.obstacles,
                &self.data,
                &self.cfg,
                &mut self.solver,
            )
            .ok()?;
            let u = dynamics::io_linearize(&cur, &out.mu_plant, &self.s.robot, Regularization::default())
                .ok()?;
            cur = integrate_step(&cur, &u, h, &self.s.robot, Integrator::Rk4);
            let p = cur.position();
            let unsafe_step = self
                .s
                .obstacles
                .iter()
                .zip(&self.radii)
                .any(|(o, &r)| barrier_value(p, o, r) < 0.0);
            if unsafe_step {
                return None;
            }
        }
        self.s.bounds.contains(cur.position()).then_some(cur)
    }
}

/// RRT-CBF-QP baseline. Waypoints are spaced by the planner `dt` and carry
/// no controls (each edge is a sequence of controller ticks).
pub fn plan_rrt_cbf_qp<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<PlanResult, PlanError> {
    let data = control::solve_lyapunov(&s.clf).map_err(PlanError::Controller)?;
    let mut steer = Steer {
        s,
        radii: s.combined_radii(),
        data,
        cfg: ClfCbfConfig {
            input_limits: Some(InputLimits {
                regularization: Regularization::default(),
                speed_horizon: Some(s.planner.dt / s.planner.qp_substeps as f64),
            }),
            ..ClfCbfConfig::new(s.robot, s.cbf, s.clf)
        },
        solver: QpSolver::with_warm_start(),
        steering: CbfQpSteering::from_scenario(s),
    };
    let goal = s.goal.position();
    let tol = s.planner.goal_tolerance;
    let mut tree = Tree::new(s.start);
    if s.start.distance_to(goal) <= tol {
        return Ok(timed_result(&tree, 0, s.planner.dt, 0));
    }
    for iter in 0..s.planner.max_iters {
        let q = sample_point(rng, s);
        let near = tree.nearest(q);
        let z = tree.node(near).state;
        steer.solver.reset();
        let Some(next) = steer.extend(z, q) else {
            continue;
        };
        let id = tree.add(next, near, None);
        if next.distance_to(goal) <= tol {
            return Ok(timed_result(&tree, id, s.planner.dt, iter + 1));
        }
    }
    Err(PlanError::NoPath {
        iterations: s.planner.max_iters,
    })
}
