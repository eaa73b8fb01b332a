//! Closed-loop path following: the plan becomes a time-parameterized
//! reference that the CLF-CBF-QP controller tracks on the true plant.

use alloc::vec::Vec;
use core::fmt;

use crate::control::{self, ClfCbfConfig, ControlError, InputLimits, Reference};
use crate::dynamics::{self, integrate_step, Integrator, PseudoControl, Regularization, TransformedState};
use crate::math::{self, dist2};
use crate::model::{Control, Obstacle, PlanResult, Scenario, State, UncertaintyBounds};
use crate::qp::QpSolver;
use crate::safety::barrier_value;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: State,
    /// Control applied from this tick to the next.
    pub control: Control,
    pub mu: PseudoControl,
    /// Barrier value against each true obstacle.
    pub barriers: Vec<f64>,
    /// CLF value `V = e' P e`.
    pub lyapunov: f64,
    /// `dV/dt` at this tick under the input actually applied, after
    /// linearization and limits.
    pub lyapunov_rate: f64,
    pub relaxation: f64,
}

impl Sample {
    /// Smallest barrier value at this tick, `+inf` with no obstacles.
    pub fn min_barrier(&self) -> f64 {
        self.barriers.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn final_state(&self) -> Option<State> {
        self.samples.last().map(|s| s.state)
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }
}

/// Where and how deep the trajectory got into an obstacle's unsafe set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierMin {
    pub value: f64,
    pub t: f64,
    pub obstacle: usize,
}

/// Global minimum of the recorded barrier values; `None` when nothing was
/// recorded (no samples or no obstacles). Ties keep the earliest sample and
/// the lowest obstacle index.
pub fn min_barrier(traj: &Trajectory) -> Option<BarrierMin> {
    let mut best: Option<BarrierMin> = None;
    for s in &traj.samples {
        for (i, &b) in s.barriers.iter().enumerate() {
            if best.is_none_or(|m| b < m.value) {
                best = Some(BarrierMin {
                    value: b,
                    t: s.t,
                    obstacle: i,
                });
            }
        }
    }
    best
}

/// Ticks on which some true barrier went below `-tol`.
pub fn collision_ticks(traj: &Trajectory, tol: f64) -> usize {
    traj.samples.iter().filter(|s| s.min_barrier() < -tol).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowConfig {
    pub dt_ctrl: f64,
    /// Extra time allowed past the end of the plan before giving up.
    pub time_slack: f64,
    /// Worst-case barrier rows in the controller, for perceived obstacles
    /// known only up to these bounds.
    pub uncertainty: Option<UncertaintyBounds>,
    pub regularization: Regularization,
    /// Keep the controller's output inside the actuator limits instead of
    /// saturating it afterwards.
    pub input_limits: bool,
    /// Added to every perceived radius in the controller; absorbs the
    /// error of holding each input for a whole tick.
    pub margin: f64,
}

impl Default for FollowConfig {
    fn default() -> Self {
        Self {
            dt_ctrl: 0.02,
            time_slack: 10.0,
            uncertainty: None,
            regularization: Regularization::default(),
            input_limits: true,
            margin: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FollowErrorKind {
    ControllerInfeasible(ControlError),
    TimeBudgetExceeded,
    /// Inputs rejected before simulating.
    InvalidInput(&'static str),
}

/// Follower failure; carries the trajectory simulated up to that point.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowError {
    pub kind: FollowErrorKind,
    pub partial: Trajectory,
}

impl fmt::Display for FollowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FollowErrorKind::ControllerInfeasible(e) => {
                write!(f, "controller failed at t = {}: {e}", self.partial.duration())
            }
            FollowErrorKind::TimeBudgetExceeded => {
                write!(f, "goal not reached by t = {}", self.partial.duration())
            }
            FollowErrorKind::InvalidInput(why) => write!(f, "invalid follower input: {why}"),
        }
    }
}

/// Reference through the plan's waypoints: a cubic Hermite curve in
/// position per segment, with velocity and acceleration its exact time
/// derivatives, so the reference is a trajectory of the double integrator
/// the controller assumes. Waypoint velocities are the average of the
/// adjacent segment velocities, zero at the last waypoint. After the last
/// waypoint the reference holds still.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePath {
    times: Vec<f64>,
    points: Vec<[f64; 2]>,
    velocities: Vec<[f64; 2]>,
}

impl ReferencePath {
    /// `None` for an empty plan or timestamps that do not strictly increase.
    pub fn from_plan(plan: &PlanResult) -> Option<Self> {
        let times: Vec<f64> = plan.waypoints.iter().map(|w| w.t).collect();
        let points: Vec<[f64; 2]> = plan.waypoints.iter().map(|w| w.state.position()).collect();
        if points.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) {
            return None;
        }
        let seg: Vec<[f64; 2]> = (1..points.len())
            .map(|k| {
                let h = times[k] - times[k - 1];
                [
                    (points[k][0] - points[k - 1][0]) / h,
                    (points[k][1] - points[k - 1][1]) / h,
                ]
            })
            .collect();
        let n = points.len();
        let velocities = (0..n)
            .map(|k| match (k.checked_sub(1).and_then(|j| seg.get(j)), seg.get(k)) {
                (Some(a), Some(b)) => [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
                (None, Some(b)) => *b,
                (Some(_), None) | (None, None) => [0.0, 0.0],
            })
            .collect();
        Some(Self {
            times,
            points,
            velocities,
        })
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn end_point(&self) -> [f64; 2] {
        *self.points.last().expect("non-empty")
    }

    pub fn at(&self, t: f64) -> Reference {
        let n = self.times.len();
        if t >= self.end_time() || n == 1 {
            return Reference {
                state: TransformedState {
                    position: self.end_point(),
                    velocity: [0.0, 0.0],
                },
                accel: [0.0, 0.0],
            };
        }
        if t <= self.times[0] {
            return Reference {
                state: TransformedState {
                    position: self.points[0],
                    velocity: self.velocities[0],
                },
                accel: [0.0, 0.0],
            };
        }
        let k = self.times.partition_point(|&tk| tk <= t) - 1;
        let h = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / h;
        let (p0, p1) = (self.points[k], self.points[k + 1]);
        let (v0, v1) = (self.velocities[k], self.velocities[k + 1]);
        let (s2, s3) = (s * s, s * s * s);
        let w = [2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2];
        let dw = [6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s];
        let ddw = [12.0 * s - 6.0, 6.0 * s - 4.0, -12.0 * s + 6.0, 6.0 * s - 2.0];
        let comb = |c: [f64; 4], i: usize| c[0] * p0[i] + c[1] * h * v0[i] + c[2] * p1[i] + c[3] * h * v1[i];
        Reference {
            state: TransformedState {
                position: [comb(w, 0), comb(w, 1)],
                velocity: [comb(dw, 0) / h, comb(dw, 1) / h],
            },
            accel: [comb(ddw, 0) / (h * h), comb(ddw, 1) / (h * h)],
        }
    }
}

/// Tracks `plan` on the true plant of `s` with the CLF-CBF-QP controller.
/// The controller sees `perceived` obstacles; the recorded barrier values
/// are against `s.obstacles`.
///
/// Finishes once the plan's time is over and the robot is within goal
/// tolerance of the plan's last waypoint.
pub fn follow_path(
    plan: &PlanResult,
    s: &Scenario,
    perceived: &[Obstacle],
    cfg: &FollowConfig,
) -> Result<Trajectory, FollowError> {
    let mut traj = Trajectory {
        dt: cfg.dt_ctrl,
        samples: Vec::new(),
    };
    let fail = |kind, traj: Trajectory| Err(FollowError { kind, partial: traj });
    if !(cfg.dt_ctrl > 0.0) || cfg.dt_ctrl > s.planner.dt {
        return fail(FollowErrorKind::InvalidInput("dt_ctrl must be in (0, planner dt]"), traj);
    }
    let Some(path) = ReferencePath::from_plan(plan) else {
        return fail(FollowErrorKind::InvalidInput("plan timestamps must increase"), traj);
    };
    let data = match control::solve_lyapunov(&s.clf) {
        Ok(d) => d,
        Err(e) => return fail(FollowErrorKind::ControllerInfeasible(e), traj),
    };
    let mut ctrl = ClfCbfConfig::new(s.robot, s.cbf, s.clf);
    ctrl.uncertainty = cfg.uncertainty;
    if cfg.input_limits {
        ctrl.input_limits = Some(InputLimits {
            regularization: cfg.regularization,
            speed_horizon: Some(cfg.dt_ctrl),
        });
    }
    let perceived: Vec<Obstacle> = perceived
        .iter()
        .map(|o| Obstacle::new(o.x, o.y, o.r + cfg.margin))
        .collect();
    let mut solver = QpSolver::with_warm_start();
    let radii = s.combined_radii();
    let goal = path.end_point();
    let tol2 = s.planner.goal_tolerance * s.planner.goal_tolerance;
    let t_end = path.end_time();
    let deadline = t_end + cfg.time_slack;

    let mut z = plan.waypoints[0].state;
    let mut tick = 0usize;
    loop {
        let t = tick as f64 * cfg.dt_ctrl;
        let barriers: Vec<f64> = s
            .obstacles
            .iter()
            .zip(&radii)
            .map(|(o, &r)| barrier_value(z.position(), o, r))
            .collect();
        let reference = path.at(t);
        let out = match control::clf_cbf_qp_control(&z, &reference, &perceived, &data, &ctrl, &mut solver) {
            Ok(out) => out,
            Err(e) => return fail(FollowErrorKind::ControllerInfeasible(e), traj),
        };
        let u = dynamics::io_linearize(&z, &out.mu_plant, &s.robot, cfg.regularization)
            .expect("regularized linearization is never singular");
        let applied = dynamics::pseudo_control(&z, &u).0;
        let mu_rm = reference.accel;
        let lyapunov_rate = out.terms.lf_v
            + out.terms.lg_v[0] * (mu_rm[0] - applied[0])
            + out.terms.lg_v[1] * (mu_rm[1] - applied[1]);
        traj.samples.push(Sample {
            t,
            state: z,
            control: u,
            mu: out.mu_plant,
            barriers,
            lyapunov: out.terms.v,
            lyapunov_rate,
            relaxation: out.relaxation,
        });
        if t >= t_end && dist2(z.position(), goal) <= tol2 {
            return Ok(traj);
        }
        if t >= deadline {
            return fail(FollowErrorKind::TimeBudgetExceeded, traj);
        }
        z = integrate_step(&z, &u, cfg.dt_ctrl, &s.robot, Integrator::Rk4);
        tick += 1;
    }
}

/// Largest distance between the robot and the reference over the run.
pub fn max_tracking_error(traj: &Trajectory, plan: &PlanResult) -> Option<f64> {
    let path = ReferencePath::from_plan(plan)?;
    traj.samples
        .iter()
        .map(|s| math::sqrt(dist2(s.state.position(), path.at(s.t).state.position)))
        .reduce(f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bounds, Waypoint};

    fn sample(t: f64, barriers: Vec<f64>) -> Sample {
        Sample {
            t,
            state: State::default(),
            control: Control::default(),
            mu: PseudoControl::ZERO,
            barriers,
            lyapunov: 0.0,
            lyapunov_rate: 0.0,
            relaxation: 0.0,
        }
    }

    #[test]
    fn min_barrier_examples() {
        let traj = Trajectory {
            dt: 0.1,
            samples: alloc::vec![sample(0.0, alloc::vec![]), sample(0.1, alloc::vec![])],
        };
        assert_eq!(min_barrier(&traj), None);
        let traj = Trajectory {
            dt: 0.1,
            samples: alloc::vec![sample(0.0, alloc::vec![3.0]), sample(0.1, alloc::vec![1.0])],
        };
        assert_eq!(
            min_barrier(&traj),
            Some(BarrierMin {
                value: 1.0,
                t: 0.1,
                obstacle: 0
            })
        );
    }

    fn line_plan(v: f64, dt: f64, n: usize) -> PlanResult {
        PlanResult {
            waypoints: (0..n)
                .map(|k| Waypoint {
                    t: k as f64 * dt,
                    state: State::new(v * k as f64 * dt, 0.0, 0.0, v),
                    control: None,
                    node: k,
                })
                .collect(),
            ..PlanResult::default()
        }
    }

    #[test]
    fn reference_interpolates_and_holds() {
        let p = ReferencePath::from_plan(&line_plan(1.0, 0.1, 5)).unwrap();
        let r = p.at(0.25);
        assert!((r.state.position[0] - 0.25).abs() < 1e-12);
        assert!((r.state.velocity[0] - 1.0).abs() < 1e-12);
        let r = p.at(3.0);
        assert_eq!(r.state.position, [0.4, 0.0]);
        assert_eq!(r.state.velocity, [0.0, 0.0]);
    }

    #[test]
    fn straight_line_is_tracked() {
        let mut s = Scenario::new(
            State::new(0.0, 0.0, 0.0, 0.5),
            State::new(5.0, 0.0, 0.0, 0.0),
            alloc::vec![],
            Bounds::new(-1.0, 6.0, -1.0, 1.0),
        );
        s.planner.goal_tolerance = 0.1;
        let plan = line_plan(0.5, 0.1, 60);
        let traj = follow_path(&plan, &s, &[], &FollowConfig::default()).unwrap();
        let err = max_tracking_error(&traj, &plan).unwrap();
        assert!(err <= 0.05, "tracking error {err}");
    }
}
