//! Bicycle-model kinematics and its input-output linearization.
//!
//! The physical model is
//!
//! ```text
//! x' = v cos(theta)   y' = v sin(theta)   theta' = v c   v' = a
//! ```
//!
//! with `c = tan(psi) / L`. Writing the planar velocity `(v_x, v_y)` as the
//! second half of a double-integrator state gives `x2' = g(x) u` with
//!
//! ```text
//! g(x) = [ -v^2 sin(theta)  cos(theta) ]
//!        [  v^2 cos(theta)  sin(theta) ]
//! ```
//!
//! and `det g = -v^2`, singular at standstill.

use core::fmt;

use crate::linalg::{mat2_vec, Mat2};
use crate::math::{self, cos, sin};
use crate::model::{ClfParams, Control, RobotParams, State};

/// Regularization speed used when inverting `g` near standstill.
pub const DEFAULT_V_EPS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    Euler,
    #[default]
    Rk4,
}

/// Double-integrator coordinates: position and planar velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TransformedState {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
}

impl TransformedState {
    pub fn as_vector(&self) -> [f64; 4] {
        [
            self.position[0],
            self.position[1],
            self.velocity[0],
            self.velocity[1],
        ]
    }
}

/// Input of the linearized system, an acceleration pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PseudoControl(pub [f64; 2]);

impl PseudoControl {
    pub const ZERO: Self = Self([0.0, 0.0]);
}

/// Tracking error `x_rm - x` in transformed coordinates:
/// `(e_px, e_py, e_vx, e_vy)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorState(pub [f64; 4]);

impl ErrorState {
    pub fn between(reference: &TransformedState, actual: &TransformedState) -> Self {
        let r = reference.as_vector();
        let a = actual.as_vector();
        Self([r[0] - a[0], r[1] - a[1], r[2] - a[2], r[3] - a[3]])
    }

    pub fn position(&self) -> [f64; 2] {
        [self.0[0], self.0[1]]
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.0[2], self.0[3]]
    }
}

/// Decoupling matrix `g(x)` together with its determinant `-v^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoupling {
    pub matrix: Mat2,
    pub det: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    /// Fail with [`DynamicsError::SingularDecoupling`] below this speed.
    Disabled { v_eps: f64 },
    /// Evaluate `g` at `max(v, v_eps)` when inverting.
    MinSpeed { v_eps: f64 },
}

impl Regularization {
    /// Speed at which `g` is evaluated; `Disabled` passes `v` through.
    pub fn speed(self, v: f64) -> f64 {
        match self {
            Self::MinSpeed { v_eps } if v.abs() < v_eps => v_eps,
            _ => v,
        }
    }
}

impl Default for Regularization {
    fn default() -> Self {
        Self::MinSpeed {
            v_eps: DEFAULT_V_EPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DynamicsError {
    SingularDecoupling { v: f64 },
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SingularDecoupling { v } => {
                write!(f, "decoupling matrix singular at speed {v}")
            }
        }
    }
}

/// `(x', y', theta', v')` of the bicycle model.
#[inline]
pub fn state_derivative(z: &State, u: &Control) -> [f64; 4] {
    let (s, c) = (sin(z.theta), cos(z.theta));
    [z.v * c, z.v * s, z.v * u.c, u.a]
}

fn offset(z: &State, k: &[f64; 4], h: f64) -> State {
    State {
        x: z.x + h * k[0],
        y: z.y + h * k[1],
        theta: z.theta + h * k[2],
        v: z.v + h * k[3],
    }
}

/// One step of length `dt` under the constant control `u`. Speed is clamped
/// to `[0, v_max]` and heading wrapped to `(-pi, pi]` afterwards.
pub fn integrate_step(
    z: &State,
    u: &Control,
    dt: f64,
    p: &RobotParams,
    method: Integrator,
) -> State {
    let mut next = match method {
        Integrator::Euler => offset(z, &state_derivative(z, u), dt),
        Integrator::Rk4 => {
            let k1 = state_derivative(z, u);
            let k2 = state_derivative(&offset(z, &k1, dt / 2.0), u);
            let k3 = state_derivative(&offset(z, &k2, dt / 2.0), u);
            let k4 = state_derivative(&offset(z, &k3, dt), u);
            let mut incr = [0.0; 4];
            for i in 0..4 {
                incr[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
            }
            offset(z, &incr, dt)
        }
    };
    next.v = next.v.clamp(0.0, p.v_max);
    next.theta = math::wrap_angle(next.theta);
    next
}

pub fn transform(z: &State) -> TransformedState {
    TransformedState {
        position: z.position(),
        velocity: z.velocity(),
    }
}

pub fn g_matrix(z: &State) -> Decoupling {
    let (s, c) = (sin(z.theta), cos(z.theta));
    let v2 = z.v * z.v;
    Decoupling {
        matrix: [[-v2 * s, c], [v2 * c, s]],
        det: -v2,
    }
}

/// `mu = f(x) + g(x) u` with `f = 0`.
pub fn pseudo_control(z: &State, u: &Control) -> PseudoControl {
    PseudoControl(mat2_vec(&g_matrix(z).matrix, [u.c, u.a]))
}

/// Solves `g(z) u = mu` without saturating the result.
pub fn io_linearize_raw(
    z: &State,
    mu: &PseudoControl,
    reg: Regularization,
) -> Result<Control, DynamicsError> {
    if let Regularization::Disabled { v_eps } = reg {
        if z.v.abs() < v_eps {
            return Err(DynamicsError::SingularDecoupling { v: z.v });
        }
    }
    let v = reg.speed(z.v);
    let (s, c) = (sin(z.theta), cos(z.theta));
    let [m1, m2] = mu.0;
    // g^-1 = 1/(-v^2) [ s  -c ; -v^2 c  -v^2 s ]
    Ok(Control {
        c: (c * m2 - s * m1) / (v * v),
        a: c * m1 + s * m2,
    })
}

/// Clips a control to the follower's input set: `|c| <= tan(psi_max)/L`,
/// `|a| <= a_max`.
pub fn saturate(u: Control, p: &RobotParams) -> Control {
    let c_max = p.max_curvature();
    Control {
        c: u.c.clamp(-c_max, c_max),
        a: u.a.clamp(-p.a_max, p.a_max),
    }
}

/// Pre-control law `u = g(x)^-1 (mu - f(x))`, saturated to the input set.
pub fn io_linearize(
    z: &State,
    mu: &PseudoControl,
    p: &RobotParams,
    reg: Regularization,
) -> Result<Control, DynamicsError> {
    io_linearize_raw(z, mu, reg).map(|u| saturate(u, p))
}

/// `mu_pd = [-K_P  -K_D] e` for the error system.
pub fn pd_control(e: &ErrorState, clf: &ClfParams) -> PseudoControl {
    let p = mat2_vec(&clf.kp, e.position());
    let d = mat2_vec(&clf.kd, e.velocity());
    PseudoControl([-p[0] - d[0], -p[1] - d[1]])
}
