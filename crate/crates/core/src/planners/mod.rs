//! Sampling-based planners over a shared append-only tree:
//!
//! - [`plan_rrt`]: geometric RRT with fixed step size and segment checks
//! - [`plan_rrt_kbf`]: kinodynamic RRT that accepts uniformly sampled
//!   controls passing the barrier condition at a uniformly chosen node
//! - [`plan_robust_rrt_kbf`]: the same with the worst-case barrier check
//! - [`plan_rrt_cbf_qp`]: baseline steering every extension with the
//!   closed-loop CLF-CBF-QP controller

mod cbf_qp;
mod kdtree;
mod kinodynamic;
mod rrt;

use alloc::vec::Vec;
use core::fmt;

pub use cbf_qp::{plan_rrt_cbf_qp, CbfQpSteering};
pub use kdtree::{nearest_linear, KdTree};
pub use kinodynamic::{
    grow_kinodynamic_tree, plan_robust_rrt_kbf, plan_rrt_kbf, Decision, ExtensionGate,
    NominalGate, RobustGate,
};
pub use rrt::{plan_rrt, segment_collision, segment_distance};

use crate::control::ControlError;
use crate::model::{Control, PlanResult, State, ValidationReport, Waypoint};

#[derive(Debug, Clone, PartialEq)]
pub enum PlanError {
    /// No node reached the goal within `max_iters` iterations.
    NoPath { iterations: usize },
    InvalidBounds(ValidationReport),
    /// The tracking gains do not admit a Lyapunov function.
    Controller(ControlError),
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoPath { iterations } => write!(f, "no path found after {iterations} iterations"),
            Self::InvalidBounds(r) => write!(f, "invalid uncertainty bounds: {r}"),
            Self::Controller(e) => write!(f, "{e}"),
        }
    }
}

/// Planner selector shared by the bench harness and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlannerKind {
    Rrt,
    RrtKbf,
    RobustRrtKbf,
    RrtCbfQp,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [
        PlannerKind::Rrt,
        PlannerKind::RrtKbf,
        PlannerKind::RobustRrtKbf,
        PlannerKind::RrtCbfQp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rrt => "rrt",
            Self::RrtKbf => "rrt-kbf",
            Self::RobustRrtKbf => "robust-rrt-kbf",
            Self::RrtCbfQp => "rrt-cbf-qp",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeNode {
    pub state: State,
    pub parent: Option<usize>,
    pub control: Option<Control>,
}

/// Append-only planning tree. Node 0 is the root; a parent index is always
/// smaller than its child's.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    index: Option<KdTree>,
}

impl Tree {
    /// Tree with a spatial index for nearest-neighbor queries.
    pub fn new(root: State) -> Self {
        let mut t = Self::without_index(root);
        let mut kd = KdTree::new();
        kd.insert(root.position(), 0);
        t.index = Some(kd);
        t
    }

    /// Tree for planners that never query nearest neighbors.
    pub fn without_index(root: State) -> Self {
        Self {
            nodes: alloc::vec![TreeNode {
                state: root,
                parent: None,
                control: None,
            }],
            index: None,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn add(&mut self, state: State, parent: usize, control: Option<Control>) -> usize {
        assert!(parent < self.nodes.len(), "parent must already exist");
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            state,
            parent: Some(parent),
            control,
        });
        if let Some(kd) = &mut self.index {
            kd.insert(state.position(), id);
        }
        id
    }

    /// Index of the node closest to `q` in the plane; ties go to the lowest
    /// index.
    pub fn nearest(&self, q: [f64; 2]) -> usize {
        match &self.index {
            Some(kd) => kd.nearest(q).expect("tree is never empty").0,
            None => {
                let pts: Vec<[f64; 2]> = self.nodes.iter().map(|n| n.state.position()).collect();
                nearest_linear(&pts, q).expect("tree is never empty")
            }
        }
    }

    /// Node indices from the root to `leaf`.
    pub fn path_to(&self, leaf: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = Some(leaf);
        while let Some(i) = cur {
            path.push(i);
            cur = self.nodes[i].parent;
        }
        path.reverse();
        path
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.parent.map(|p| (p, i)))
            .collect()
    }
}

/// Nearest tree node to `q` by Euclidean distance of positions.
pub fn nearest_neighbor(tree: &Tree, q: [f64; 2]) -> usize {
    tree.nearest(q)
}

/// Builds a plan whose waypoints are spaced by `dt` and carry the control
/// applied from each waypoint to the next.
pub(crate) fn timed_result(tree: &Tree, leaf: usize, dt: f64, iterations: usize) -> PlanResult {
    let path = tree.path_to(leaf);
    let waypoints = path
        .iter()
        .enumerate()
        .map(|(k, &i)| Waypoint {
            t: k as f64 * dt,
            state: tree.nodes[i].state,
            control: path.get(k + 1).and_then(|&next| tree.nodes[next].control),
            node: i,
        })
        .collect();
    finish(tree, waypoints, iterations)
}

pub(crate) fn finish(tree: &Tree, waypoints: Vec<Waypoint>, iterations: usize) -> PlanResult {
    PlanResult {
        waypoints,
        nodes: tree.nodes.iter().map(|n| n.state).collect(),
        tree_edges: tree.edges(),
        iterations_used: iterations,
        wall_time: 0.0,
    }
}
