// Small dense linear algebra on row-major slices.

pub(crate) type Mat2 = [[f64; 2]; 2];
pub(crate) type Mat4 = [[f64; 4]; 4];

/// Solves `a * x = b` in place by Gaussian elimination with partial
/// pivoting. `a` is `n x n` row-major and is destroyed; on success `b`
/// holds the solution. Returns `false` if a pivot falls below `tol`
/// relative to the largest entry of `a`.
pub(crate) fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return n == 0;
    }
    let tol = scale * 1e-13;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best <= tol {
            return false;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / d;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    true
}

/// Cholesky test for positive definiteness of a symmetric `n x n` matrix.
pub(crate) fn is_positive_definite(a: &[f64], n: usize) -> bool {
    let mut l = [0.0f64; 64];
    assert!(n <= 8);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * 8 + k] * l[j * 8 + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return false;
                }
                l[i * 8 + i] = libm::sqrt(s);
            } else {
                l[i * 8 + j] = s / l[j * 8 + j];
            }
        }
    }
    true
}

pub(crate) fn is_symmetric(a: &[f64], n: usize, tol: f64) -> bool {
    (0..n).all(|i| (0..i).all(|j| (a[i * n + j] - a[j * n + i]).abs() <= tol))
}

pub(crate) fn mat2_vec(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

pub(crate) fn flatten4(m: &Mat4) -> [f64; 16] {
    let mut out = [0.0; 16];
    for i in 0..4 {
        out[i * 4..i * 4 + 4].copy_from_slice(&m[i]);
    }
    out
}

pub(crate) fn flatten2(m: &Mat2) -> [f64; 4] {
    [m[0][0], m[0][1], m[1][0], m[1][1]]
}
