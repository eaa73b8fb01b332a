use rand::Rng;

use super::{timed_result, PlanError, Tree};
use crate::dynamics::{integrate_step, Integrator};
use crate::model::{CbfParams, Control, Obstacle, PlanResult, RobotParams, Scenario, State, UncertaintyBounds};
use crate::safety;

/// Accept/reject rule applied to a sampled control at a tree node.
pub trait ExtensionGate {
    fn admits(&self, z: &State, u: &Control) -> bool;
}

/// Nominal barrier condition against every obstacle.
#[derive(Debug, Clone, Copy)]
pub struct NominalGate<'a> {
    pub obstacles: &'a [Obstacle],
    pub robot: &'a RobotParams,
    pub cbf: &'a CbfParams,
}

impl ExtensionGate for NominalGate<'_> {
    fn admits(&self, z: &State, u: &Control) -> bool {
        safety::kbf_check_all(z, u, self.obstacles, self.robot, self.cbf).passed()
    }
}

/// Worst-case barrier condition over the uncertainty box.
#[derive(Debug, Clone, Copy)]
pub struct RobustGate<'a> {
    pub obstacles: &'a [Obstacle],
    pub robot: &'a RobotParams,
    pub cbf: &'a CbfParams,
    pub bounds: UncertaintyBounds,
}

impl ExtensionGate for RobustGate<'_> {
    fn admits(&self, z: &State, u: &Control) -> bool {
        safety::robust_kbf_check_all(z, u, self.obstacles, self.robot, self.cbf, &self.bounds)
            .passed()
    }
}

/// Outcome of one kinodynamic iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    Accepted { parent: usize, node: usize, control: Control },
    /// The gate refused the sampled control at `parent`.
    Rejected { parent: usize, control: Control },
    /// The control passed but the integrated state left the workspace.
    OutOfBounds { parent: usize, control: Control },
}

/// Grows a kinodynamic tree: each iteration picks a uniformly random node,
/// samples a control, and if `gate` admits it integrates one `dt` step and
/// adds the result. Every decision is reported to `observe`.
///
/// Returns the tree, the goal node if one was reached, and the number of
/// iterations used.
pub fn grow_kinodynamic_tree<R, G, F>(
    s: &Scenario,
    gate: &G,
    rng: &mut R,
    mut observe: F,
) -> (Tree, Option<usize>, usize)
where
    R: Rng + ?Sized,
    G: ExtensionGate + ?Sized,
    F: FnMut(&Decision),
{
    let mut tree = Tree::without_index(s.start);
    let goal = s.goal.position();
    let tol = s.planner.goal_tolerance;
    if s.start.distance_to(goal) <= tol {
        return (tree, Some(0), 0);
    }
    for iter in 0..s.planner.max_iters {
        let parent = rng.gen_range(0..tree.len());
        let z = tree.node(parent).state;
        let control = safety::sample_control(rng, &s.robot);
        if !gate.admits(&z, &control) {
            observe(&Decision::Rejected { parent, control });
            continue;
        }
        let next = integrate_step(&z, &control, s.planner.dt, &s.robot, Integrator::Rk4);
        if !s.bounds.contains(next.position()) {
            observe(&Decision::OutOfBounds { parent, control });
            continue;
        }
        let node = tree.add(next, parent, Some(control));
        observe(&Decision::Accepted {
            parent,
            node,
            control,
        });
        if next.distance_to(goal) <= tol {
            return (tree, Some(node), iter + 1);
        }
    }
    let n = s.planner.max_iters;
    (tree, None, n)
}

fn plan_with_gate<R, G>(s: &Scenario, gate: &G, rng: &mut R) -> Result<PlanResult, PlanError>
where
    R: Rng + ?Sized,
    G: ExtensionGate + ?Sized,
{
    match grow_kinodynamic_tree(s, gate, rng, |_| {}) {
        (tree, Some(leaf), iters) => Ok(timed_result(&tree, leaf, s.planner.dt, iters)),
        (_, None, iters) => Err(PlanError::NoPath { iterations: iters }),
    }
}

/// RRT-KBF: random visited node, random admissible control, nominal
/// barrier gate. Each waypoint carries the control that leads to the next.
pub fn plan_rrt_kbf<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<PlanResult, PlanError> {
    let gate = NominalGate {
        obstacles: &s.obstacles,
        robot: &s.robot,
        cbf: &s.cbf,
    };
    plan_with_gate(s, &gate, rng)
}

/// Robust RRT-KBF: as [`plan_rrt_kbf`] with the worst-case gate.
pub fn plan_robust_rrt_kbf<R: Rng + ?Sized>(
    s: &Scenario,
    bounds: &UncertaintyBounds,
    rng: &mut R,
) -> Result<PlanResult, PlanError> {
    bounds.validate().map_err(PlanError::InvalidBounds)?;
    let gate = RobustGate {
        obstacles: &s.obstacles,
        robot: &s.robot,
        cbf: &s.cbf,
        bounds: *bounds,
    };
    plan_with_gate(s, &gate, rng)
}
