//! Domain types shared by every other module: vehicle state and input,
//! robot and controller parameters, the scenario model and its validation.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;

use crate::linalg::{self, Mat2, Mat4};
use crate::math;

/// Vehicle configuration `(x_p, y_p, theta, v)`.
///
/// `theta` lives in `(-pi, pi]` and `v` in `[0, v_max]`; the integrator
/// re-establishes both after every step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
}

impl State {
    pub const fn new(x: f64, y: f64, theta: f64, v: f64) -> Self {
        Self { x, y, theta, v }
    }

    #[inline]
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Planar velocity `(v cos theta, v sin theta)`.
    #[inline]
    pub fn velocity(&self) -> [f64; 2] {
        [self.v * math::cos(self.theta), self.v * math::sin(self.theta)]
    }

    pub fn distance_to(&self, p: [f64; 2]) -> f64 {
        math::hypot(self.x - p[0], self.y - p[1])
    }
}

/// Physical input: curvature command `c = tan(psi) / L` and acceleration `a`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Control {
    pub c: f64,
    pub a: f64,
}

impl Control {
    pub const fn new(c: f64, a: f64) -> Self {
        Self { c, a }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotParams {
    /// Wheelbase `L` (m).
    pub wheelbase: f64,
    /// Maximum steering angle (rad).
    pub psi_max: f64,
    /// Maximum acceleration (m/s^2).
    pub a_max: f64,
    /// Maximum forward speed (m/s).
    pub v_max: f64,
    /// Radius of the robot's safety circle (m).
    pub radius: f64,
}

impl RobotParams {
    /// Largest admissible curvature command, `tan(psi_max) / L`.
    pub fn max_curvature(&self) -> f64 {
        math::tan(self.psi_max) / self.wheelbase
    }
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            wheelbase: 0.2,
            psi_max: 30f64.to_radians(),
            a_max: 1.0,
            v_max: 1.2,
            radius: 0.25,
        }
    }
}

/// Circular obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl Obstacle {
    pub const fn new(x: f64, y: f64, r: f64) -> Self {
        Self { x, y, r }
    }

    #[inline]
    pub fn center(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// Safety distance between robot and obstacle centers: `r_o + r_r`.
#[inline]
pub fn combined_radius(o: &Obstacle, robot: &RobotParams) -> f64 {
    o.r + robot.radius
}

/// Exponential barrier gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbfParams {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl Default for CbfParams {
    fn default() -> Self {
        Self {
            gamma1: 1.0,
            gamma2: 1.0,
        }
    }
}

/// Tracking gains, Lyapunov right-hand side and CLF relaxation penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClfParams {
    pub kp: Mat2,
    pub kd: Mat2,
    pub q: Mat4,
    pub penalty: f64,
}

impl Default for ClfParams {
    fn default() -> Self {
        let mut q = [[0.0; 4]; 4];
        for (i, row) in q.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self {
            kp: [[1.0, 0.0], [0.0, 1.0]],
            kd: [[1.0, 0.0], [0.0, 1.0]],
            q,
            penalty: 1e3,
        }
    }
}

/// Bounds on the additive (`delta1_max`, per component) and multiplicative
/// (`delta2_max`, fraction of the pseudo-control) model error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UncertaintyBounds {
    pub delta1_max: f64,
    pub delta2_max: f64,
}

impl UncertaintyBounds {
    pub const ZERO: Self = Self {
        delta1_max: 0.0,
        delta2_max: 0.0,
    };

    pub const fn new(delta1_max: f64, delta2_max: f64) -> Self {
        Self {
            delta1_max,
            delta2_max,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationReport> {
        let mut errors = Vec::new();
        check_bounds(self, &mut errors);
        ValidationReport::result(errors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    /// Geometric extension length of the plain RRT (m).
    pub step_size: f64,
    /// Control hold duration per kinodynamic extension (s).
    pub dt: f64,
    pub max_iters: usize,
    /// Positional goal acceptance radius (m).
    pub goal_tolerance: f64,
    pub seed: u64,
    /// Probability of sampling the goal position in the point-sampling
    /// planners (RRT, RRT-CBF-QP).
    pub goal_bias: f64,
    /// Closed-loop controller substeps per RRT-CBF-QP extension.
    pub qp_substeps: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            step_size: 0.5,
            dt: 0.1,
            max_iters: 50_000,
            goal_tolerance: 0.5,
            seed: 0,
            goal_bias: 0.0,
            qp_substeps: 10,
        }
    }
}

/// Axis-aligned workspace rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Bounds {
    pub const fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Self {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    #[inline]
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.xmin && p[0] <= self.xmax && p[1] >= self.ymin && p[1] <= self.ymax
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub start: State,
    pub goal: State,
    pub obstacles: Vec<Obstacle>,
    pub bounds: Bounds,
    pub robot: RobotParams,
    pub cbf: CbfParams,
    pub clf: ClfParams,
    pub planner: PlannerConfig,
}

impl Scenario {
    /// Scenario with default parameter bundles.
    pub fn new(start: State, goal: State, obstacles: Vec<Obstacle>, bounds: Bounds) -> Self {
        Self {
            start,
            goal,
            obstacles,
            bounds,
            robot: RobotParams::default(),
            cbf: CbfParams::default(),
            clf: ClfParams::default(),
            planner: PlannerConfig::default(),
        }
    }

    pub fn combined_radii(&self) -> Vec<f64> {
        self.obstacles
            .iter()
            .map(|o| combined_radius(o, &self.robot))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ValidationReport> {
        ValidationReport::result(collect_violations(self))
    }
}

/// One invariant violation found by [`validate_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationError {
    /// The start lies strictly inside the inflated obstacle `obstacle`.
    StartInCollision {
        obstacle: usize,
        distance: f64,
        required: f64,
    },
    StartOutOfBounds { x: f64, y: f64 },
    GoalOutOfBounds { x: f64, y: f64 },
    /// A parameter required to be strictly positive is not.
    NonPositiveParameter { field: &'static str, value: f64 },
    /// A value outside its admissible range (angles, speeds, steering limit).
    OutOfRange { field: &'static str, value: f64 },
    NonFinite { field: &'static str },
    /// A gain or weight matrix that is not symmetric positive definite.
    NotPositiveDefinite { field: &'static str },
    /// Multiplicative uncertainty bound of one or more flips the sign of the
    /// worst-case pseudo-control term.
    UnsupportedBound { field: &'static str, value: f64 },
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::StartInCollision {
                obstacle,
                distance,
                required,
            } => write!(
                f,
                "start is {distance} m from obstacle {obstacle}, closer than r_o + r_r = {required} m"
            ),
            Self::StartOutOfBounds { x, y } => write!(f, "start ({x}, {y}) outside bounds"),
            Self::GoalOutOfBounds { x, y } => write!(f, "goal ({x}, {y}) outside bounds"),
            Self::NonPositiveParameter { field, value } => {
                write!(f, "{field} must be > 0, got {value}")
            }
            Self::OutOfRange { field, value } => write!(f, "{field} out of range: {value}"),
            Self::NonFinite { field } => write!(f, "{field} is not finite"),
            Self::NotPositiveDefinite { field } => {
                write!(f, "{field} must be symmetric positive definite")
            }
            Self::UnsupportedBound { field, value } => {
                write!(f, "{field} must be in [0, 1), got {value}")
            }
        }
    }
}

/// Every violation found in one validation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub errors: Vec<ValidationError>,
}

impl ValidationReport {
    fn result(errors: Vec<ValidationError>) -> Result<(), Self> {
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Self { errors })
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Returns the scenario unchanged iff every invariant holds, otherwise the
/// full list of violations.
pub fn validate_scenario(s: Scenario) -> Result<Scenario, ValidationReport> {
    s.validate().map(|()| s)
}

fn positive(field: &'static str, value: f64, errors: &mut Vec<ValidationError>) {
    if !value.is_finite() {
        errors.push(ValidationError::NonFinite { field });
    } else if value <= 0.0 {
        errors.push(ValidationError::NonPositiveParameter { field, value });
    }
}

fn finite(field: &'static str, value: f64, errors: &mut Vec<ValidationError>) -> bool {
    if value.is_finite() {
        true
    } else {
        errors.push(ValidationError::NonFinite { field });
        false
    }
}

fn check_state(
    prefix: [&'static str; 4],
    s: &State,
    v_max: f64,
    errors: &mut Vec<ValidationError>,
) {
    finite(prefix[0], s.x, errors);
    finite(prefix[1], s.y, errors);
    if finite(prefix[2], s.theta, errors) && !(s.theta > -PI && s.theta <= PI) {
        errors.push(ValidationError::OutOfRange {
            field: prefix[2],
            value: s.theta,
        });
    }
    if finite(prefix[3], s.v, errors) && !(s.v >= 0.0 && s.v <= v_max) {
        errors.push(ValidationError::OutOfRange {
            field: prefix[3],
            value: s.v,
        });
    }
}

fn check_spd2(field: &'static str, m: &Mat2, errors: &mut Vec<ValidationError>) {
    let flat = linalg::flatten2(m);
    if flat.iter().any(|v| !v.is_finite()) {
        errors.push(ValidationError::NonFinite { field });
    } else if !linalg::is_symmetric(&flat, 2, 1e-12) || !linalg::is_positive_definite(&flat, 2) {
        errors.push(ValidationError::NotPositiveDefinite { field });
    }
}

fn check_bounds(b: &UncertaintyBounds, errors: &mut Vec<ValidationError>) {
    if finite("uncertainty.delta1_max", b.delta1_max, errors) && b.delta1_max < 0.0 {
        errors.push(ValidationError::OutOfRange {
            field: "uncertainty.delta1_max",
            value: b.delta1_max,
        });
    }
    if finite("uncertainty.delta2_max", b.delta2_max, errors) {
        if b.delta2_max < 0.0 {
            errors.push(ValidationError::OutOfRange {
                field: "uncertainty.delta2_max",
                value: b.delta2_max,
            });
        } else if b.delta2_max >= 1.0 {
            errors.push(ValidationError::UnsupportedBound {
                field: "uncertainty.delta2_max",
                value: b.delta2_max,
            });
        }
    }
}

fn collect_violations(s: &Scenario) -> Vec<ValidationError> {
    let mut errors = Vec::new();

    let r = &s.robot;
    positive("robot.wheelbase", r.wheelbase, &mut errors);
    positive("robot.psi_max", r.psi_max, &mut errors);
    if r.psi_max.is_finite() && r.psi_max >= FRAC_PI_2 {
        errors.push(ValidationError::OutOfRange {
            field: "robot.psi_max",
            value: r.psi_max,
        });
    }
    positive("robot.a_max", r.a_max, &mut errors);
    positive("robot.v_max", r.v_max, &mut errors);
    positive("robot.radius", r.radius, &mut errors);

    positive("cbf.gamma1", s.cbf.gamma1, &mut errors);
    positive("cbf.gamma2", s.cbf.gamma2, &mut errors);

    check_spd2("clf.kp", &s.clf.kp, &mut errors);
    check_spd2("clf.kd", &s.clf.kd, &mut errors);
    let q = linalg::flatten4(&s.clf.q);
    if q.iter().any(|v| !v.is_finite()) {
        errors.push(ValidationError::NonFinite { field: "clf.q" });
    } else if !linalg::is_symmetric(&q, 4, 1e-12) || !linalg::is_positive_definite(&q, 4) {
        errors.push(ValidationError::NotPositiveDefinite { field: "clf.q" });
    }
    positive("clf.penalty", s.clf.penalty, &mut errors);

    let p = &s.planner;
    positive("planner.step_size", p.step_size, &mut errors);
    positive("planner.dt", p.dt, &mut errors);
    if p.max_iters == 0 {
        errors.push(ValidationError::NonPositiveParameter {
            field: "planner.max_iters",
            value: 0.0,
        });
    }
    positive("planner.goal_tolerance", p.goal_tolerance, &mut errors);
    if !(p.goal_bias >= 0.0 && p.goal_bias <= 1.0) {
        errors.push(ValidationError::OutOfRange {
            field: "planner.goal_bias",
            value: p.goal_bias,
        });
    }
    if p.qp_substeps == 0 {
        errors.push(ValidationError::NonPositiveParameter {
            field: "planner.qp_substeps",
            value: 0.0,
        });
    }

    let b = &s.bounds;
    let bounds_ok = [b.xmin, b.xmax, b.ymin, b.ymax]
        .iter()
        .all(|v| v.is_finite());
    if !bounds_ok {
        errors.push(ValidationError::NonFinite { field: "bounds" });
    } else {
        positive("bounds.width", b.width(), &mut errors);
        positive("bounds.height", b.height(), &mut errors);
    }

    let v_max = if r.v_max.is_finite() { r.v_max } else { f64::INFINITY };
    check_state(["start.x", "start.y", "start.theta", "start.v"], &s.start, v_max, &mut errors);
    check_state(["goal.x", "goal.y", "goal.theta", "goal.v"], &s.goal, v_max, &mut errors);
    if bounds_ok {
        if !b.contains(s.start.position()) {
            errors.push(ValidationError::StartOutOfBounds {
                x: s.start.x,
                y: s.start.y,
            });
        }
        if !b.contains(s.goal.position()) {
            errors.push(ValidationError::GoalOutOfBounds {
                x: s.goal.x,
                y: s.goal.y,
            });
        }
    }

    for (i, o) in s.obstacles.iter().enumerate() {
        finite("obstacle.x", o.x, &mut errors);
        finite("obstacle.y", o.y, &mut errors);
        positive("obstacle.r", o.r, &mut errors);
        let required = combined_radius(o, r);
        let distance = s.start.distance_to(o.center());
        if distance < required {
            errors.push(ValidationError::StartInCollision {
                obstacle: i,
                distance,
                required,
            });
        }
    }
    errors
}

/// One step of a plan: time, state and the control held from this waypoint
/// to the next (`None` on the last waypoint and for geometric plans).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub t: f64,
    pub state: State,
    pub control: Option<Control>,
    /// Index of the tree node this waypoint came from.
    pub node: usize,
}

/// Planner output: the timestamped path plus the explored tree.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanResult {
    pub waypoints: Vec<Waypoint>,
    /// Node states of the whole tree, indexed as in `tree_edges`.
    pub nodes: Vec<State>,
    /// `(parent, child)` pairs.
    pub tree_edges: Vec<(usize, usize)>,
    pub iterations_used: usize,
    /// Seconds spent in the planning call. The core has no clock; callers
    /// that time the call fill this in.
    pub wall_time: f64,
}

impl PlanResult {
    /// Euclidean length of the waypoint polyline.
    pub fn path_length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| w[0].state.distance_to(w[1].state.position()))
            .sum()
    }

    /// Smallest distance from a waypoint to an obstacle boundary inflated
    /// by the robot radius. `None` without obstacles or waypoints.
    pub fn min_clearance(&self, obstacles: &[Obstacle], robot: &RobotParams) -> Option<f64> {
        let mut best: Option<f64> = None;
        for w in &self.waypoints {
            for o in obstacles {
                let c = w.state.distance_to(o.center()) - combined_radius(o, robot);
                best = Some(best.map_or(c, |b| b.min(c)));
            }
        }
        best
    }

    pub fn duration(&self) -> f64 {
        self.waypoints.last().map_or(0.0, |w| w.t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn base() -> Scenario {
        Scenario::new(
            State::new(0.0, 0.0, 0.0, 0.0),
            State::new(4.0, 0.0, 0.0, 0.0),
            vec![],
            Bounds::new(-1.0, 5.0, -3.0, 3.0),
        )
    }

    #[test]
    fn empty_obstacles_is_valid() {
        assert!(validate_scenario(base()).is_ok());
    }

    #[test]
    fn start_exactly_on_inflated_boundary_is_valid() {
        let mut s = base();
        let robot = s.robot;
        s.obstacles.push(Obstacle::new(1.0 + robot.radius, 0.0, 1.0));
        assert!(validate_scenario(s).is_ok());
    }

    #[test]
    fn start_inside_inflated_obstacle_is_rejected() {
        let mut s = base();
        s.obstacles.push(Obstacle::new(1.0, 0.0, 1.0));
        let err = validate_scenario(s).unwrap_err();
        assert!(matches!(
            err.errors[0],
            ValidationError::StartInCollision { obstacle: 0, .. }
        ));
    }

    #[test]
    fn negative_radius_is_non_positive_parameter() {
        let mut s = base();
        s.obstacles.push(Obstacle::new(3.0, 2.0, -1.0));
        let err = validate_scenario(s).unwrap_err();
        assert!(err.errors.contains(&ValidationError::NonPositiveParameter {
            field: "obstacle.r",
            value: -1.0
        }));
    }

    #[test]
    fn goal_outside_bounds() {
        let mut s = base();
        s.goal.x = 9.0;
        let err = validate_scenario(s).unwrap_err();
        assert_eq!(
            err.errors,
            vec![ValidationError::GoalOutOfBounds { x: 9.0, y: 0.0 }]
        );
    }

    #[test]
    fn reports_every_violation() {
        let mut s = base();
        s.cbf.gamma1 = 0.0;
        s.planner.dt = -0.1;
        s.clf.kp = [[1.0, 2.0], [2.0, 1.0]];
        let err = validate_scenario(s).unwrap_err();
        assert_eq!(err.errors.len(), 3, "{err}");
    }

    #[test]
    fn validation_is_idempotent() {
        let s = validate_scenario(base()).unwrap();
        assert_eq!(validate_scenario(s.clone()).unwrap(), s);
        let mut bad = base();
        bad.robot.v_max = 0.0;
        let e1 = validate_scenario(bad.clone()).unwrap_err();
        let e2 = validate_scenario(bad).unwrap_err();
        assert_eq!(e1, e2);
    }

    #[test]
    fn multiplicative_bound_of_one_is_unsupported() {
        let err = UncertaintyBounds::new(0.1, 1.0).validate().unwrap_err();
        assert!(matches!(
            err.errors[0],
            ValidationError::UnsupportedBound { .. }
        ));
        assert!(UncertaintyBounds::new(0.5, 0.99).validate().is_ok());
    }

    #[test]
    fn combined_radius_examples() {
        let mut robot = RobotParams::default();
        robot.radius = 0.0;
        assert_eq!(combined_radius(&Obstacle::new(0.0, 0.0, 1.0), &robot), 1.0);
        robot.radius = 0.25;
        assert_eq!(combined_radius(&Obstacle::new(0.0, 0.0, 0.5), &robot), 0.75);
        robot.radius = 0.3;
        assert!((combined_radius(&Obstacle::new(0.0, 0.0, 2.0), &robot) - 2.3).abs() < 1e-15);
    }

    #[test]
    fn default_steering_limit() {
        let r = RobotParams::default();
        assert!((r.psi_max - PI / 6.0).abs() < 1e-15);
        assert!((r.max_curvature() - math::tan(PI / 6.0) / 0.2).abs() < 1e-12);
    }
}
