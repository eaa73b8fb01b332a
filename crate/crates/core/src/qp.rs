//! Dense strictly convex QP solver for tiny problems:
//!
//! ```text
//! minimize    1/2 x' H x + f' x
//! subject to  A x <= b
//! ```
//!
//! The method is a dual active-set iteration in the style of Goldfarb and
//! Idnani: it starts from the unconstrained minimizer, repeatedly adds a
//! violated constraint and moves along the primal/dual step direction,
//! dropping constraints whose multipliers would turn negative. A violated
//! constraint whose normal is a non-positive combination of the active
//! normals proves infeasibility.
//!
//! Sizes here are a handful of variables and rows, so every step solves the
//! small reduced systems from scratch instead of updating factorizations.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::solve_in_place;

/// `A x <= b` rows are considered satisfied within this absolute slack,
/// scaled by the row norm.
const FEAS_TOL: f64 = 1e-11;
/// Directions shorter than this are treated as zero.
const ZERO_STEP: f64 = 1e-13;

pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    n: usize,
    h: Vec<f64>,
    f: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl QpProblem {
    /// `h` is `n x n` row-major, `f` has length `n`.
    pub fn new(n: usize, h: Vec<f64>, f: Vec<f64>) -> Self {
        assert_eq!(h.len(), n * n, "H must be n x n");
        assert_eq!(f.len(), n, "f must have length n");
        Self {
            n,
            h,
            f,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    /// Appends the row `row . x <= bound`.
    pub fn add_constraint(&mut self, row: &[f64], bound: f64) -> &mut Self {
        assert_eq!(row.len(), self.n, "constraint row must have length n");
        self.a.extend_from_slice(row);
        self.b.push(bound);
        self
    }

    /// Appends `lower <= row . x <= upper`, dropping infinite sides.
    pub fn add_range(&mut self, row: &[f64], lower: f64, upper: f64) -> &mut Self {
        if upper.is_finite() {
            self.add_constraint(row, upper);
        }
        if lower.is_finite() {
            let neg: Vec<f64> = row.iter().map(|v| -v).collect();
            self.add_constraint(&neg, -lower);
        }
        self
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    pub fn bound(&self, i: usize) -> f64 {
        self.b[i]
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let mut quad = 0.0;
        for i in 0..n {
            let mut hx = 0.0;
            for j in 0..n {
                hx += self.h[i * n + j] * x[j];
            }
            quad += x[i] * hx;
        }
        0.5 * quad + dot(&self.f, x)
    }

    /// Largest constraint violation `max(A x - b, 0)`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        (0..self.num_constraints())
            .map(|i| dot(self.row(i), x) - self.b[i])
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    /// The active set changed `max_iter` times without converging.
    IterLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: QpStatus,
    /// Indices of the constraints active at `x`, ascending.
    pub active_set: Vec<usize>,
    /// Multipliers, one per constraint (zero when inactive).
    pub multipliers: Vec<f64>,
    pub iterations: usize,
}

impl QpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == QpStatus::Optimal
    }
}

/// Solves `p` from a cold start.
pub fn solve_qp(p: &QpProblem, max_iter: usize) -> QpSolution {
    QpSolver::new().solve(p, max_iter)
}

/// Solver that remembers the last optimal active set and tries it as the
/// starting point of the next solve. Holds per-call state, so use one
/// instance per control loop; `clone` is cheap.
#[derive(Debug, Clone, Default)]
pub struct QpSolver {
    warm: Vec<usize>,
    warm_start: bool,
}

impl QpSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_warm_start() -> Self {
        Self {
            warm: Vec::new(),
            warm_start: true,
        }
    }

    pub fn reset(&mut self) {
        self.warm.clear();
    }

    pub fn solve(&mut self, p: &QpProblem, max_iter: usize) -> QpSolution {
        let sol = Work::new(p).run(
            if self.warm_start { &self.warm } else { &[] },
            max_iter,
        );
        if self.warm_start {
            self.warm.clear();
            if sol.status == QpStatus::Optimal {
                self.warm.extend_from_slice(&sol.active_set);
            }
        }
        sol
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Work<'a> {
    p: &'a QpProblem,
    n: usize,
    hinv: Vec<f64>,
    row_norm: Vec<f64>,
}

impl<'a> Work<'a> {
    fn new(p: &'a QpProblem) -> Self {
        let n = p.n;
        let mut hinv = vec![0.0; n * n];
        for col in 0..n {
            let mut a = p.h.clone();
            let mut e = vec![0.0; n];
            e[col] = 1.0;
            // H is required to be positive definite; a singular H leaves NaNs
            // that surface as a non-optimal status below.
            if !solve_in_place(&mut a, &mut e, n) {
                e.iter_mut().for_each(|v| *v = f64::NAN);
            }
            for row in 0..n {
                hinv[row * n + col] = e[row];
            }
        }
        let row_norm = (0..p.num_constraints())
            .map(|i| libm::sqrt(dot(p.row(i), p.row(i))))
            .collect();
        Self {
            p,
            n,
            hinv,
            row_norm,
        }
    }

    fn hinv_mul(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| dot(&self.hinv[i * n..(i + 1) * n], v))
            .collect()
    }

    fn violation(&self, x: &[f64], i: usize) -> f64 {
        dot(self.p.row(i), x) - self.p.b[i]
    }

    fn tol(&self, i: usize) -> f64 {
        FEAS_TOL * (1.0 + self.row_norm[i] + self.p.b[i].abs())
    }

    /// Solves the equality-constrained problem on `active`. Returns
    /// `(x, lambda)` or `None` if the active rows are dependent.
    fn equality_solve(&self, active: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let k = active.len();
        let x0: Vec<f64> = self.hinv_mul(&self.p.f).iter().map(|v| -v).collect();
        if k == 0 {
            return Some((x0, Vec::new()));
        }
        // (N Hinv N') lambda = N x0 - b_N
        let hn: Vec<Vec<f64>> = active.iter().map(|&i| self.hinv_mul(self.p.row(i))).collect();
        let mut m = vec![0.0; k * k];
        for (r, &i) in active.iter().enumerate() {
            for c in 0..k {
                m[r * k + c] = dot(self.p.row(i), &hn[c]);
            }
        }
        let mut rhs: Vec<f64> = active
            .iter()
            .map(|&i| dot(self.p.row(i), &x0) - self.p.b[i])
            .collect();
        if !solve_in_place(&mut m, &mut rhs, k) {
            return None;
        }
        let mut x = x0;
        for (c, lam) in rhs.iter().enumerate() {
            for j in 0..n {
                x[j] -= lam * hn[c][j];
            }
        }
        Some((x, rhs))
    }

    /// Step directions for adding constraint `p` to `active`:
    /// primal `z = -Hinv (a_p - N' r)` and dual `r = (N Hinv N')^-1 N Hinv a_p`.
    fn directions(&self, active: &[usize], p: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let k = active.len();
        let ap = self.p.row(p);
        let w = self.hinv_mul(ap);
        let mut r = Vec::new();
        let mut resid: Vec<f64> = ap.to_vec();
        if k > 0 {
            let hn: Vec<Vec<f64>> = active.iter().map(|&i| self.hinv_mul(self.p.row(i))).collect();
            let mut m = vec![0.0; k * k];
            for (ri, &i) in active.iter().enumerate() {
                for c in 0..k {
                    m[ri * k + c] = dot(self.p.row(i), &hn[c]);
                }
            }
            r = active.iter().map(|&i| dot(self.p.row(i), &w)).collect();
            if !solve_in_place(&mut m, &mut r, k) {
                return None;
            }
            for (c, &i) in active.iter().enumerate() {
                let row = self.p.row(i);
                for j in 0..n {
                    resid[j] -= r[c] * row[j];
                }
            }
        }
        let z: Vec<f64> = self.hinv_mul(&resid).iter().map(|v| -v).collect();
        Some((z, r))
    }

    fn first_violated(&self, x: &[f64], active: &[usize]) -> Option<usize> {
        (0..self.p.num_constraints())
            .find(|&i| !active.contains(&i) && self.violation(x, i) > self.tol(i))
    }

    fn run(&self, warm: &[usize], max_iter: usize) -> QpSolution {
        let m = self.p.num_constraints();
        let mut active: Vec<usize> = Vec::new();
        let mut lambda: Vec<f64> = Vec::new();
        let mut x: Vec<f64> = Vec::new();

        if !warm.is_empty() && warm.iter().all(|&i| i < m) {
            if let Some((xw, lw)) = self.equality_solve(warm) {
                if lw.iter().all(|&l| l >= 0.0) && xw.iter().all(|v| v.is_finite()) {
                    active = warm.to_vec();
                    lambda = lw;
                    x = xw;
                }
            }
        }
        if x.is_empty() {
            x = self.equality_solve(&[]).map(|s| s.0).unwrap_or_default();
        }
        if x.iter().any(|v| !v.is_finite()) {
            return self.finish(x, &active, &lambda, QpStatus::Infeasible, 0);
        }

        let mut iterations = 0usize;
        loop {
            let Some(p) = self.first_violated(&x, &active) else {
                return self.finish(x, &active, &lambda, QpStatus::Optimal, iterations);
            };
            let mut t_p = 0.0;
            loop {
                if iterations >= max_iter {
                    return self.finish(x, &active, &lambda, QpStatus::IterLimit, iterations);
                }
                let Some((z, r)) = self.directions(&active, p) else {
                    return self.finish(x, &active, &lambda, QpStatus::IterLimit, iterations);
                };
                // Largest dual step keeping active multipliers nonnegative;
                // ties go to the lowest constraint index.
                let mut t1 = f64::INFINITY;
                let mut drop: Option<usize> = None;
                for (j, &rj) in r.iter().enumerate() {
                    if rj > ZERO_STEP {
                        let t = lambda[j] / rj;
                        let better = match drop {
                            None => true,
                            Some(d) => t < t1 || (t == t1 && active[j] < active[d]),
                        };
                        if better {
                            t1 = t;
                            drop = Some(j);
                        }
                    }
                }
                let znorm = libm::sqrt(dot(&z, &z));
                let ap = self.p.row(p);
                let slope = -dot(ap, &z);
                let primal_step = znorm > ZERO_STEP * (1.0 + self.row_norm[p]) && slope > 0.0;

                if !primal_step {
                    let Some(j) = drop else {
                        return self.finish(x, &active, &lambda, QpStatus::Infeasible, iterations);
                    };
                    for (l, rj) in lambda.iter_mut().zip(&r) {
                        *l -= t1 * rj;
                    }
                    t_p += t1;
                    active.remove(j);
                    lambda.remove(j);
                    iterations += 1;
                    continue;
                }

                let t2 = self.violation(&x, p) / slope;
                let t = t1.min(t2);
                for (xi, zi) in x.iter_mut().zip(&z) {
                    *xi += t * zi;
                }
                for (l, rj) in lambda.iter_mut().zip(&r) {
                    *l -= t * rj;
                }
                t_p += t;
                iterations += 1;
                if t2 <= t1 {
                    active.push(p);
                    lambda.push(t_p);
                    break;
                }
                let j = drop.expect("finite partial step has a blocking multiplier");
                active.remove(j);
                lambda.remove(j);
            }
        }
    }

    fn finish(
        &self,
        x: Vec<f64>,
        active: &[usize],
        lambda: &[f64],
        status: QpStatus,
        iterations: usize,
    ) -> QpSolution {
        let mut multipliers = vec![0.0; self.p.num_constraints()];
        for (&i, &l) in active.iter().zip(lambda) {
            multipliers[i] = l.max(0.0);
        }
        let mut active_set = active.to_vec();
        active_set.sort_unstable();
        let objective = if x.len() == self.n {
            self.p.objective(&x)
        } else {
            f64::NAN
        };
        QpSolution {
            x,
            objective,
            status,
            active_set,
            multipliers,
            iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_minimum() {
        let p = QpProblem::new(2, vec![2.0, 0.0, 0.0, 2.0], vec![-4.0, 0.0]);
        let s = solve_qp(&p, DEFAULT_MAX_ITER);
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.x[0] - 2.0).abs() < 1e-14 && s.x[1].abs() < 1e-14);
        assert!((s.objective + 4.0).abs() < 1e-14);
        assert!(s.active_set.is_empty());
    }

    #[test]
    fn projection_onto_halfline() {
        // (x - 2)^2 = x^2 - 4x + 4
        let mut p = QpProblem::new(1, vec![2.0], vec![-4.0]);
        p.add_constraint(&[1.0], 1.0);
        let s = solve_qp(&p, DEFAULT_MAX_ITER);
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-14);
        assert_eq!(s.active_set, vec![0]);
        assert!((s.multipliers[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut p = QpProblem::new(1, vec![2.0], vec![0.0]);
        p.add_constraint(&[1.0], -1.0);
        p.add_constraint(&[-1.0], -1.0);
        assert_eq!(solve_qp(&p, DEFAULT_MAX_ITER).status, QpStatus::Infeasible);
    }

    #[test]
    fn zero_row_with_negative_bound_is_infeasible() {
        let mut p = QpProblem::new(2, vec![2.0, 0.0, 0.0, 2.0], vec![0.0, 0.0]);
        p.add_constraint(&[0.0, 0.0], -1e-3);
        assert_eq!(solve_qp(&p, DEFAULT_MAX_ITER).status, QpStatus::Infeasible);
        let mut p = QpProblem::new(2, vec![2.0, 0.0, 0.0, 2.0], vec![0.0, 0.0]);
        p.add_constraint(&[0.0, 0.0], 0.0);
        assert_eq!(solve_qp(&p, DEFAULT_MAX_ITER).status, QpStatus::Optimal);
    }

    #[test]
    fn two_sided_range_drops_infinite_side() {
        let mut p = QpProblem::new(1, vec![2.0], vec![0.0]);
        p.add_range(&[1.0], f64::NEG_INFINITY, 3.0);
        p.add_range(&[1.0], 0.5, f64::INFINITY);
        assert_eq!(p.num_constraints(), 2);
        let s = solve_qp(&p, DEFAULT_MAX_ITER);
        assert!((s.x[0] - 0.5).abs() < 1e-14);
        assert_eq!(s.active_set, vec![1]);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut p = QpProblem::new(2, vec![2.0, 0.0, 0.0, 2.0], vec![-4.0, -4.0]);
        p.add_constraint(&[1.0, 0.0], 0.0);
        p.add_constraint(&[0.0, 1.0], 0.0);
        assert_eq!(solve_qp(&p, 1).status, QpStatus::IterLimit);
        assert_eq!(solve_qp(&p, 2).status, QpStatus::Optimal);
    }

    #[test]
    fn warm_start_reuses_active_set() {
        let mut p = QpProblem::new(2, vec![2.0, 0.0, 0.0, 2.0], vec![-4.0, -4.0]);
        p.add_constraint(&[1.0, 1.0], 1.0);
        p.add_constraint(&[-1.0, 0.0], 5.0);
        let mut solver = QpSolver::with_warm_start();
        let cold = solver.solve(&p, DEFAULT_MAX_ITER);
        let warm = solver.solve(&p, DEFAULT_MAX_ITER);
        assert_eq!(warm.iterations, 0);
        assert_eq!(cold.active_set, warm.active_set);
        for (a, b) in cold.x.iter().zip(&warm.x) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
