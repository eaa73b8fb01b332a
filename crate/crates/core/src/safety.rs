//! Exponential barrier terms for circular obstacles and the kinodynamic
//! barrier checks used to accept or reject sampled controls.
//!
//! With `p` the robot position, `o` the obstacle center, `r` the combined
//! radius and `mu` the planar acceleration:
//!
//! ```text
//! B    = |p - o|^2 - r^2
//! B'   = 2 (p - o) . v
//! B1   = B' + gamma1 B
//! B1'  = gamma1 B' + 2 |v|^2 + 2 (p - o) . mu
//! ```
//!
//! A control passes when `B1' + gamma2 B1 >= 0`. The robust check takes the
//! worst case of that condition over `mu -> mu + d1 + d2 mu` with
//! `|d1_i| <= delta1_max` and `|d2| <= delta2_max`.

use rand::Rng;

use crate::dynamics::{self, PseudoControl};
use crate::math::dot2;
use crate::model::{combined_radius, CbfParams, Control, Obstacle, RobotParams, State, UncertaintyBounds};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    #[inline]
    pub fn from_value(value: f64) -> Self {
        if value >= 0.0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    #[inline]
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierTerms {
    pub b: f64,
    pub b_dot: f64,
    pub b1: f64,
    /// Part of `B1'` that does not depend on `mu`: `gamma1 B' + 2|v|^2`.
    pub b1dot_const: f64,
    /// Row multiplying `mu` in `B1'`: `2 (p - o)`.
    pub b1dot_row: [f64; 2],
}

impl BarrierTerms {
    /// `B1'` for a given planar acceleration.
    pub fn b1_dot(&self, mu: &PseudoControl) -> f64 {
        self.b1dot_const + dot2(self.b1dot_row, mu.0)
    }
}

pub fn barrier_terms(z: &State, o: &Obstacle, r: f64, cbf: &CbfParams) -> BarrierTerms {
    let dx = z.x - o.x;
    let dy = z.y - o.y;
    let [vx, vy] = z.velocity();
    let b = dx * dx + dy * dy - r * r;
    let b_dot = 2.0 * dx * vx + 2.0 * dy * vy;
    let b1 = b_dot + cbf.gamma1 * b;
    BarrierTerms {
        b,
        b_dot,
        b1,
        b1dot_const: cbf.gamma1 * b_dot + 2.0 * vx * vx + 2.0 * vy * vy,
        b1dot_row: [2.0 * dx, 2.0 * dy],
    }
}

/// `B(x)` only.
#[inline]
pub fn barrier_value(p: [f64; 2], o: &Obstacle, r: f64) -> f64 {
    let dx = p[0] - o.x;
    let dy = p[1] - o.y;
    dx * dx + dy * dy - r * r
}

/// Affine form of the barrier condition, `A(x) + b(x) . mu`, plus its
/// worst case over the uncertainty box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustTerms {
    /// `gamma1 B' + 2|v|^2 + gamma2 B1`.
    pub a_val: f64,
    /// `2 (p - o)`.
    pub b_row: [f64; 2],
    /// `A - delta1_max |b|_1`.
    pub psi0_worst: f64,
    /// `b (1 + delta2_max)`.
    pub psi1_p: [f64; 2],
    /// `b (1 - delta2_max)`.
    pub psi1_n: [f64; 2],
}

impl RobustTerms {
    /// Worst-case condition value for the planar acceleration `mu`.
    pub fn worst_value(&self, mu: &PseudoControl) -> f64 {
        self.psi0_worst + dot2(self.psi1_p, mu.0).min(dot2(self.psi1_n, mu.0))
    }

    /// Condition value with no uncertainty.
    pub fn nominal_value(&self, mu: &PseudoControl) -> f64 {
        self.a_val + dot2(self.b_row, mu.0)
    }
}

pub fn robust_terms(
    z: &State,
    o: &Obstacle,
    r: f64,
    cbf: &CbfParams,
    bounds: &UncertaintyBounds,
) -> RobustTerms {
    let t = barrier_terms(z, o, r, cbf);
    let a_val = t.b1dot_const + cbf.gamma2 * t.b1;
    let b = t.b1dot_row;
    let l1 = b[0].abs() + b[1].abs();
    let up = 1.0 + bounds.delta2_max;
    let dn = 1.0 - bounds.delta2_max;
    RobustTerms {
        a_val,
        b_row: b,
        psi0_worst: a_val - bounds.delta1_max * l1,
        psi1_p: [b[0] * up, b[1] * up],
        psi1_n: [b[0] * dn, b[1] * dn],
    }
}

/// Value of `B1' + gamma2 B1` when `u` is applied at `z`.
pub fn kbf_value(z: &State, u: &Control, o: &Obstacle, r: f64, cbf: &CbfParams) -> f64 {
    let t = barrier_terms(z, o, r, cbf);
    let mu = dynamics::pseudo_control(z, u);
    // Same association as `RobustTerms::nominal_value` so that zero bounds
    // reproduce this value bit for bit.
    (t.b1dot_const + cbf.gamma2 * t.b1) + dot2(t.b1dot_row, mu.0)
}

pub fn kbf_check(z: &State, u: &Control, o: &Obstacle, r: f64, cbf: &CbfParams) -> Verdict {
    Verdict::from_value(kbf_value(z, u, o, r, cbf))
}

/// Worst-case value of `B1' + gamma2 B1` over the uncertainty box.
pub fn robust_kbf_value(
    z: &State,
    u: &Control,
    o: &Obstacle,
    r: f64,
    cbf: &CbfParams,
    bounds: &UncertaintyBounds,
) -> f64 {
    let mu = dynamics::pseudo_control(z, u);
    robust_terms(z, o, r, cbf, bounds).worst_value(&mu)
}

pub fn robust_kbf_check(
    z: &State,
    u: &Control,
    o: &Obstacle,
    r: f64,
    cbf: &CbfParams,
    bounds: &UncertaintyBounds,
) -> Verdict {
    Verdict::from_value(robust_kbf_value(z, u, o, r, cbf, bounds))
}

/// Nominal check against every obstacle, stopping at the first failure.
pub fn kbf_check_all(
    z: &State,
    u: &Control,
    obstacles: &[Obstacle],
    robot: &RobotParams,
    cbf: &CbfParams,
) -> Verdict {
    let ok = obstacles
        .iter()
        .all(|o| kbf_check(z, u, o, combined_radius(o, robot), cbf).passed());
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

pub fn robust_kbf_check_all(
    z: &State,
    u: &Control,
    obstacles: &[Obstacle],
    robot: &RobotParams,
    cbf: &CbfParams,
    bounds: &UncertaintyBounds,
) -> Verdict {
    let ok = obstacles
        .iter()
        .all(|o| robust_kbf_check(z, u, o, combined_radius(o, robot), cbf, bounds).passed());
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Uniform kinodynamically admissible control: curvature in
/// `[-tan(psi_max)/L, tan(psi_max)/L]`, acceleration in `[0, a_max]`.
pub fn sample_control<R: Rng + ?Sized>(rng: &mut R, p: &RobotParams) -> Control {
    let c_max = p.max_curvature();
    let c = rng.gen_range(-c_max..=c_max);
    let a = rng.gen_range(0.0..=p.a_max);
    Control { c, a }
}
