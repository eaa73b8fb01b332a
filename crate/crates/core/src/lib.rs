//! Safety-critical kinodynamic motion planning for a bicycle-model vehicle.
//!
//! The crate contains the algorithmic core only and builds without `std`
//! (an allocator is required):
//!
//! - [`model`]: domain types, scenario model and validation
//! - [`dynamics`]: bicycle kinematics, the double-integrator transform and
//!   input-output linearization
//! - [`qp`]: a dense dual active-set QP solver for tiny problems
//! - [`control`]: Lyapunov synthesis and the CLF-QP / CLF-CBF-QP controllers
//! - [`safety`]: exponential barrier terms and the nominal / robust
//!   kinodynamic barrier checks used by the planners
//! - [`planners`]: RRT, RRT-KBF, Robust RRT-KBF and the RRT-CBF-QP baseline
//! - [`sim`]: closed-loop path following with safety monitoring
//!
//! Scenario files, benchmarking and the command line live in the `kbf` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod linalg;
pub mod math;

pub mod control;
pub mod dynamics;
pub mod model;
pub mod planners;
pub mod qp;
pub mod safety;
pub mod sim;

pub use model::{
    combined_radius, validate_scenario, Bounds, CbfParams, ClfParams, Control, Obstacle,
    PlanResult, PlannerConfig, RobotParams, Scenario, State, UncertaintyBounds, ValidationError,
    ValidationReport, Waypoint,
};
