#![allow(dead_code)]

// Brute-force KKT oracle for tiny strictly convex QPs
//     min 1/2 x'Hx + f'x   s.t.  A x <= b
// Every subset S of at most n rows is tried as the active set: solve the
// equality-constrained KKT system, keep it if the point is feasible and the
// multipliers are nonnegative. Strict convexity makes the survivor unique.

use nalgebra::{DMatrix, DVector};

pub struct Oracle {
    pub x: Vec<f64>,
    pub objective: f64,
}

pub fn objective(h: &[f64], f: &[f64], x: &[f64]) -> f64 {
    let n = f.len();
    let mut v = 0.0;
    for i in 0..n {
        for j in 0..n {
            v += 0.5 * x[i] * h[i * n + j] * x[j];
        }
        v += f[i] * x[i];
    }
    v
}

/// `None` when no subset satisfies the KKT conditions (infeasible).
pub fn solve(h: &[f64], f: &[f64], a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Oracle> {
    let n = f.len();
    let m = b.len();
    let mut best: Option<Oracle> = None;
    for mask in 0u32..(1 << m) {
        let rows: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let k = rows.len();
        if k > n {
            continue;
        }
        let mut kkt = DMatrix::<f64>::zeros(n + k, n + k);
        let mut rhs = DVector::<f64>::zeros(n + k);
        for i in 0..n {
            for j in 0..n {
                kkt[(i, j)] = h[i * n + j];
            }
            rhs[i] = -f[i];
        }
        for (r, &ci) in rows.iter().enumerate() {
            for j in 0..n {
                kkt[(n + r, j)] = a[ci][j];
                kkt[(j, n + r)] = a[ci][j];
            }
            rhs[n + r] = b[ci];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else {
            continue;
        };
        let x: Vec<f64> = (0..n).map(|i| sol[i]).collect();
        let dual_ok = (0..k).all(|r| sol[n + r] >= -tol);
        let primal_ok = (0..m).all(|i| {
            let ax: f64 = a[i].iter().zip(&x).map(|(p, q)| p * q).sum();
            ax <= b[i] + tol * (1.0 + b[i].abs())
        });
        if dual_ok && primal_ok {
            let obj = objective(h, f, &x);
            if best.as_ref().is_none_or(|o| obj < o.objective) {
                best = Some(Oracle { x, objective: obj });
            }
        }
    }
    best
}
