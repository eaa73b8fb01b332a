#![allow(dead_code)]

// Independent reference computations shared by several test targets.

use kbf_core::{ClfParams, Control, State, UncertaintyBounds};
use nalgebra::{Matrix2, Matrix4};
use rand::Rng;

/// Symmetric positive definite 2x2 with eigenvalues in roughly [0.2, 8].
pub fn random_pd2<R: Rng>(rng: &mut R) -> [[f64; 2]; 2] {
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let l1: f64 = rng.gen_range(0.2..8.0);
    let l2: f64 = rng.gen_range(0.2..8.0);
    let r = Matrix2::new(phi.cos(), -phi.sin(), phi.sin(), phi.cos());
    let m = r * Matrix2::new(l1, 0.0, 0.0, l2) * r.transpose();
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// `max |A'P + PA + Q|` with `A = [0 I; -K_P -K_D]`, computed with nalgebra.
pub fn lyapunov_residual(clf: &ClfParams, p: &[[f64; 4]; 4]) -> f64 {
    let mut a = Matrix4::<f64>::zeros();
    a[(0, 2)] = 1.0;
    a[(1, 3)] = 1.0;
    for i in 0..2 {
        for j in 0..2 {
            a[(2 + i, j)] = -clf.kp[i][j];
            a[(2 + i, 2 + j)] = -clf.kd[i][j];
        }
    }
    let pm = Matrix4::from_fn(|i, j| p[i][j]);
    let qm = Matrix4::from_fn(|i, j| clf.q[i][j]);
    (a.transpose() * pm + pm * a + qm).abs().max()
}

/// Barrier condition `B1' + gamma2 B1` for the perturbed pseudo-control
/// `mu + d1 + d2 mu`, evaluated from first principles.
pub fn perturbed_condition(
    z: &State,
    u: &Control,
    o: [f64; 3],
    gamma: (f64, f64),
    d1: [f64; 2],
    d2: f64,
) -> f64 {
    let (s, c) = z.theta.sin_cos();
    let v = [z.v * c, z.v * s];
    // Planar acceleration of the bicycle under u.
    let mu = [u.a * c - z.v * z.v * u.c * s, u.a * s + z.v * z.v * u.c * c];
    let mu_t = [mu[0] + d1[0] + d2 * mu[0], mu[1] + d1[1] + d2 * mu[1]];
    let d = [z.x - o[0], z.y - o[1]];
    let b = d[0] * d[0] + d[1] * d[1] - o[2] * o[2];
    let bd = 2.0 * (d[0] * v[0] + d[1] * v[1]);
    let bdd = 2.0 * (v[0] * v[0] + v[1] * v[1]) + 2.0 * (d[0] * mu_t[0] + d[1] * mu_t[1]);
    let (g1, g2) = gamma;
    // B1 = B' + g1 B, B1' = B'' + g1 B'
    (bdd + g1 * bd) + g2 * (bd + g1 * b)
}

/// Minimum of [`perturbed_condition`] over an `n x n` grid on the additive
/// box `|d1_i| <= delta1_max`, crossed with `n` values of `|d2| <= delta2_max`.
pub fn grid_worst(
    z: &State,
    u: &Control,
    o: [f64; 3],
    gamma: (f64, f64),
    bounds: &UncertaintyBounds,
    n: usize,
) -> f64 {
    let lin = |m: f64, k: usize| if n == 1 { 0.0 } else { -m + 2.0 * m * k as f64 / (n - 1) as f64 };
    let mut worst = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            let d1 = [lin(bounds.delta1_max, i), lin(bounds.delta1_max, j)];
            for k in 0..n {
                let d2 = lin(bounds.delta2_max, k);
                worst = worst.min(perturbed_condition(z, u, o, gamma, d1, d2));
            }
        }
    }
    worst
}
