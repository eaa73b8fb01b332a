//! CLF synthesis and the CLF-QP / CLF-CBF-QP tracking controllers.
//!
//! Controllers work on the error system `e = x_rm - x` with `e' = F e + G mu`
//! where `mu` is the error-system input. The plant receives
//! `mu_plant = mu_rm - mu`, so the PD law `mu = -K_P e_p - K_D e_v` becomes
//! `mu_plant = mu_rm + K_P e_p + K_D e_v`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dynamics::{self, ErrorState, PseudoControl, Regularization, TransformedState};
use crate::linalg::{self, Mat4};
use crate::math::{self, dot2};
use crate::model::{combined_radius, CbfParams, ClfParams, Obstacle, RobotParams, State, UncertaintyBounds};
use crate::qp::{QpProblem, QpSolver, QpStatus, DEFAULT_MAX_ITER};
use crate::safety;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlError {
    /// The closed-loop matrix `[0 I; -K_P -K_D]` is not Hurwitz.
    NotHurwitz,
    /// The hard barrier rows admit no pseudo-control.
    InfeasibleSafety,
    /// The CLF row alone is infeasible (only possible when the error has
    /// no input direction and the drift term is positive).
    InfeasibleClf,
    QpIterLimit,
}

impl fmt::Display for ControlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotHurwitz => f.write_str("closed-loop gain matrix is not Hurwitz"),
            Self::InfeasibleSafety => f.write_str("barrier constraints are jointly infeasible"),
            Self::InfeasibleClf => f.write_str("CLF constraint is infeasible"),
            Self::QpIterLimit => f.write_str("QP solver hit its iteration limit"),
        }
    }
}

/// Lyapunov solution and the error-system matrices it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClfData {
    /// Solution of `A' P + P A = -Q`.
    pub p: Mat4,
    pub q: Mat4,
    /// Error drift `[0 I; 0 0]`.
    pub f: Mat4,
    /// Error input `[0; I]`, 4 x 2.
    pub g: [[f64; 2]; 4],
    /// Closed loop `[0 I; -K_P -K_D]`.
    pub a_cl: Mat4,
}

impl ClfData {
    /// Max-norm of `A' P + P A + Q`.
    pub fn residual(&self) -> f64 {
        lyapunov_residual(&self.a_cl, &self.p, &self.q)
    }
}

/// Max-norm of `A' P + P A + Q`.
pub fn lyapunov_residual(a: &Mat4, p: &Mat4, q: &Mat4) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let mut s = q[i][j];
            for k in 0..4 {
                s += a[k][i] * p[k][j] + p[i][k] * a[k][j];
            }
            worst = worst.max(s.abs());
        }
    }
    worst
}

/// `[0 I; -K_P -K_D]`.
pub fn closed_loop_matrix(clf: &ClfParams) -> Mat4 {
    let mut a = [[0.0; 4]; 4];
    a[0][2] = 1.0;
    a[1][3] = 1.0;
    for i in 0..2 {
        for j in 0..2 {
            a[2 + i][j] = -clf.kp[i][j];
            a[2 + i][2 + j] = -clf.kd[i][j];
        }
    }
    a
}

/// Solves `A' P + P A = -Q` through the vectorized 16 x 16 system.
///
/// With `Q` positive definite the solution is positive definite exactly when
/// `A` is Hurwitz, so a singular system or an indefinite `P` is reported as
/// [`ControlError::NotHurwitz`].
pub fn solve_lyapunov(clf: &ClfParams) -> Result<ClfData, ControlError> {
    let a = closed_loop_matrix(clf);
    let q = clf.q;
    // Unknown P[k][l] sits at column 4k + l; equation (i, j) at row 4i + j.
    let mut sys = [0.0f64; 256];
    let mut rhs = [0.0f64; 16];
    for i in 0..4 {
        for j in 0..4 {
            let row = 4 * i + j;
            for k in 0..4 {
                // (A' P)[i][j] = sum_k A[k][i] P[k][j]
                sys[row * 16 + 4 * k + j] += a[k][i];
                // (P A)[i][j] = sum_k P[i][k] A[k][j]
                sys[row * 16 + 4 * i + k] += a[k][j];
            }
            rhs[row] = -q[i][j];
        }
    }
    if !linalg::solve_in_place(&mut sys, &mut rhs, 16) {
        return Err(ControlError::NotHurwitz);
    }
    let mut p = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            p[i][j] = 0.5 * (rhs[4 * i + j] + rhs[4 * j + i]);
        }
    }
    if !linalg::is_positive_definite(&linalg::flatten4(&p), 4) {
        return Err(ControlError::NotHurwitz);
    }
    let mut f = [[0.0; 4]; 4];
    f[0][2] = 1.0;
    f[1][3] = 1.0;
    let mut g = [[0.0; 2]; 4];
    g[2][0] = 1.0;
    g[3][1] = 1.0;
    Ok(ClfData {
        p,
        q,
        f,
        g,
        a_cl: a,
    })
}

/// `V = e'Pe`, `L_f V = e'(F'P + PF)e` and `L_g V = 2 e'PG`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClfTerms {
    pub v: f64,
    pub lf_v: f64,
    pub lg_v: [f64; 2],
}

fn quad_form(m: &Mat4, e: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += e[i] * m[i][j] * e[j];
        }
    }
    s
}

pub fn clf_terms(e: &ErrorState, d: &ClfData) -> ClfTerms {
    let e = &e.0;
    let mut pe = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            pe[i] += d.p[i][j] * e[j];
        }
    }
    let v = dot4(e, &pe);
    // F'P + PF
    let mut fp = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = 0.0;
            for k in 0..4 {
                s += d.f[k][i] * d.p[k][j] + d.p[i][k] * d.f[k][j];
            }
            fp[i][j] = s;
        }
    }
    let lf_v = quad_form(&fp, e);
    let mut lg_v = [0.0; 2];
    for (c, out) in lg_v.iter_mut().enumerate() {
        *out = 2.0 * (0..4).map(|k| pe[k] * d.g[k][c]).sum::<f64>();
    }
    ClfTerms { v, lf_v, lg_v }
}

fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// `e'Qe`.
pub fn error_cost(e: &ErrorState, q: &Mat4) -> f64 {
    quad_form(q, &e.0)
}

/// CLF-QP: `min |mu - mu_pd|^2` s.t. `L_gV mu <= -L_fV - e'Qe`.
pub fn clf_qp_control(
    e: &ErrorState,
    d: &ClfData,
    clf: &ClfParams,
    solver: &mut QpSolver,
) -> Result<PseudoControl, ControlError> {
    let pd = dynamics::pd_control(e, clf).0;
    let terms = clf_terms(e, d);
    let mut qp = QpProblem::new(2, vec![2.0, 0.0, 0.0, 2.0], vec![-2.0 * pd[0], -2.0 * pd[1]]);
    qp.add_constraint(&terms.lg_v, -terms.lf_v - error_cost(e, &d.q));
    let sol = solver.solve(&qp, DEFAULT_MAX_ITER);
    match sol.status {
        QpStatus::Optimal => Ok(PseudoControl([sol.x[0], sol.x[1]])),
        QpStatus::Infeasible => Err(ControlError::InfeasibleClf),
        QpStatus::IterLimit => Err(ControlError::QpIterLimit),
    }
}

/// Reference point for the tracking controllers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Reference {
    pub state: TransformedState,
    /// Feed-forward acceleration `mu_rm` of the reference.
    pub accel: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClfCbfConfig {
    pub robot: RobotParams,
    pub cbf: CbfParams,
    pub clf: ClfParams,
    /// Only obstacles whose inflated boundary is within this distance of the
    /// robot get a barrier row. Infinite by default.
    pub sensing_radius: f64,
    /// When set, each barrier row is replaced by the two worst-case rows of
    /// the robust barrier condition.
    pub uncertainty: Option<UncertaintyBounds>,
    /// Adds rows keeping `g(x)^-1 mu_plant` inside the actuator box, so the
    /// returned input is applied without saturation.
    pub input_limits: Option<InputLimits>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InputLimits {
    /// Speed regularization, the same as passed to [`dynamics::io_linearize`].
    pub regularization: Regularization,
    /// When set, the acceleration is further limited so that holding it for
    /// this long keeps the speed inside `[0, v_max]`, where the integrator
    /// would otherwise clamp it.
    pub speed_horizon: Option<f64>,
}

impl ClfCbfConfig {
    pub fn new(robot: RobotParams, cbf: CbfParams, clf: ClfParams) -> Self {
        Self {
            robot,
            cbf,
            clf,
            sensing_radius: f64::INFINITY,
            uncertainty: None,
            input_limits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClfCbfOutput {
    /// Error-system input.
    pub mu: PseudoControl,
    /// Input applied to the plant's double integrator, `mu_rm - mu`.
    pub mu_plant: PseudoControl,
    /// CLF relaxation, `>= 0`.
    pub relaxation: f64,
    pub terms: ClfTerms,
    /// Indices (into the obstacle slice) that received barrier rows.
    pub constrained: Vec<usize>,
}

/// CLF-CBF-QP over `(mu_1, mu_2, d)`:
///
/// ```text
/// min |mu - mu_pd|^2 + P d^2
/// s.t. L_fV + L_gV mu + e'Qe <= d,  d >= 0
///      B1' + gamma2 B1 >= 0  for every sensed obstacle
/// ```
///
/// With input limits set, the CLF and barrier rows are written for the
/// acceleration the regularized linearization actually delivers, which
/// differs from the command only below the regularization speed.
pub fn clf_cbf_qp_control(
    z: &State,
    reference: &Reference,
    obstacles: &[Obstacle],
    data: &ClfData,
    cfg: &ClfCbfConfig,
    solver: &mut QpSolver,
) -> Result<ClfCbfOutput, ControlError> {
    let x = dynamics::transform(z);
    let e = ErrorState::between(&reference.state, &x);
    let pd = dynamics::pd_control(&e, &cfg.clf).0;
    let terms = clf_terms(&e, data);
    let penalty = cfg.clf.penalty;

    let mut qp = QpProblem::new(
        3,
        vec![2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0 * penalty],
        vec![-2.0 * pd[0], -2.0 * pd[1], 0.0],
    );
    let mu_rm = reference.accel;
    let m = Realized::new(z, cfg.input_limits.map(|l| l.regularization));
    // Realized error input: mu_rm - M (mu_rm - mu) = M mu + (mu_rm - M mu_rm).
    let lg = m.apply(terms.lg_v);
    let drift = dot2(terms.lg_v, mu_rm) - dot2(lg, mu_rm);
    qp.add_constraint(&[lg[0], lg[1], -1.0], -terms.lf_v - error_cost(&e, &data.q) - drift);
    qp.add_constraint(&[0.0, 0.0, -1.0], 0.0);

    let mut constrained = Vec::new();
    for (i, o) in obstacles.iter().enumerate() {
        let r = combined_radius(o, &cfg.robot);
        if z.distance_to(o.center()) - r > cfg.sensing_radius {
            continue;
        }
        constrained.push(i);
        let rows = match cfg.uncertainty {
            None => {
                let t = safety::barrier_terms(z, o, r, &cfg.cbf);
                let a_val = t.b1dot_const + cfg.cbf.gamma2 * t.b1;
                [(a_val, t.b1dot_row), (a_val, t.b1dot_row)]
            }
            Some(bounds) => {
                let t = safety::robust_terms(z, o, r, &cfg.cbf, &bounds);
                [(t.psi0_worst, t.psi1_p), (t.psi0_worst, t.psi1_n)]
            }
        };
        let count = if cfg.uncertainty.is_some() { 2 } else { 1 };
        // a + w . M (mu_rm - mu) >= 0  <=>  (M w) . mu <= a + (M w) . mu_rm
        for &(a_val, w) in rows.iter().take(count) {
            let w = m.apply(w);
            qp.add_constraint(&[w[0], w[1], 0.0], a_val + dot2(w, mu_rm));
        }
    }

    if let Some(lim) = cfg.input_limits {
        add_input_rows(&mut qp, z, mu_rm, &cfg.robot, &lim);
    }

    let sol = solver.solve(&qp, DEFAULT_MAX_ITER);
    match sol.status {
        QpStatus::Optimal => {
            let mu = [sol.x[0], sol.x[1]];
            Ok(ClfCbfOutput {
                mu: PseudoControl(mu),
                mu_plant: PseudoControl([mu_rm[0] - mu[0], mu_rm[1] - mu[1]]),
                relaxation: sol.x[2].max(0.0),
                terms,
                constrained,
            })
        }
        QpStatus::Infeasible => Err(ControlError::InfeasibleSafety),
        QpStatus::IterLimit => Err(ControlError::QpIterLimit),
    }
}

/// Map from commanded to realized planar acceleration. Below the
/// regularization speed the linearization divides by `v_eps^2` instead of
/// `v^2`, so only the fraction `rho = (v / v_eps)^2` of the commanded
/// lateral acceleration reaches the plant: `M = I - (1 - rho) n n'` with
/// `n` the lateral unit vector. `M` is symmetric.
struct Realized {
    shrink: f64,
    n: [f64; 2],
}

impl Realized {
    fn new(z: &State, reg: Option<Regularization>) -> Self {
        let n = [-math::sin(z.theta), math::cos(z.theta)];
        let shrink = match reg {
            Some(r) => {
                let v_reg = r.speed(z.v);
                if v_reg > z.v {
                    let ratio = z.v.max(0.0) / v_reg;
                    1.0 - ratio * ratio
                } else {
                    0.0
                }
            }
            None => 0.0,
        };
        Self { shrink, n }
    }

    fn apply(&self, w: [f64; 2]) -> [f64; 2] {
        if self.shrink == 0.0 {
            return w;
        }
        let k = self.shrink * dot2(self.n, w);
        [w[0] - k * self.n[0], w[1] - k * self.n[1]]
    }
}

/// With `mu_plant = mu_rm - mu`, the physical inputs are
/// `c = (cos mu_plant_2 - sin mu_plant_1) / v^2` and
/// `a = cos mu_plant_1 + sin mu_plant_2`; both are linear in `mu`.
fn add_input_rows(qp: &mut QpProblem, z: &State, mu_rm: [f64; 2], robot: &RobotParams, lim: &InputLimits) {
    let (s, c) = (math::sin(z.theta), math::cos(z.theta));
    let v = lim.regularization.speed(z.v);
    let c_lim = robot.max_curvature() * v * v;
    let c_rm = c * mu_rm[1] - s * mu_rm[0];
    let a_rm = c * mu_rm[0] + s * mu_rm[1];
    qp.add_range(&[-s, c, 0.0], c_rm - c_lim, c_rm + c_lim);
    let (mut a_lo, mut a_hi) = (-robot.a_max, robot.a_max);
    if let Some(h) = lim.speed_horizon {
        a_lo = a_lo.max(-z.v.max(0.0) / h);
        a_hi = a_hi.min(((robot.v_max - z.v) / h).max(0.0));
    }
    // The applied acceleration is a_rm - [c, s] . mu.
    qp.add_range(&[c, s, 0.0], a_rm - a_hi, a_rm - a_lo);
}
