//! Dense helpers for the 1×1 and 2×2 tensors of a chart of dimension ≤ 2.
//!
//! Tensors are stored as `[[f64; 2]; 2]`; only the leading `dim × dim` block
//! is meaningful and the remaining entries are kept at zero.

pub type Mat = [[f64; 2]; 2];

pub const ZERO: Mat = [[0.0; 2]; 2];

pub fn identity(dim: usize) -> Mat {
    let mut m = ZERO;
    for (i, row) in m.iter_mut().enumerate().take(dim) {
        row[i] = 1.0;
    }
    m
}

pub fn scaled(m: &Mat, s: f64) -> Mat {
    [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]
}

pub fn det(dim: usize, m: &Mat) -> f64 {
    match dim {
        1 => m[0][0],
        _ => m[0][0] * m[1][1] - m[0][1] * m[1][0],
    }
}

/// Inverse of the leading block. Callers check positivity of the
/// determinant beforehand.
pub fn inverse(dim: usize, m: &Mat) -> Mat {
    match dim {
        1 => [[1.0 / m[0][0], 0.0], [0.0, 0.0]],
        _ => {
            let d = det(2, m);
            [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
        }
    }
}

pub fn mul(dim: usize, a: &Mat, b: &Mat) -> Mat {
    let mut c = ZERO;
    for i in 0..dim {
        for j in 0..dim {
            c[i][j] = (0..dim).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn symmetrized(dim: usize, a: &Mat) -> Mat {
    let mut s = ZERO;
    for i in 0..dim {
        for j in 0..dim {
            s[i][j] = 0.5 * (a[i][j] + a[j][i]);
        }
    }
    s
}

pub fn trace_product(dim: usize, a: &Mat, b: &Mat) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            s += a[i][j] * b[j][i];
        }
    }
    s
}

/// Smallest eigenvalue of a symmetric matrix, used as a positivity test.
pub fn min_eigenvalue(dim: usize, m: &Mat) -> f64 {
    generalized_eigenvalues(dim, m, &identity(dim)).0
}

/// Eigenvalues `(min, max)` of the symmetric form `a` relative to the
/// positive-definite form `g`, i.e. the extrema of `a(X, X)` over
/// `g(X, X) = 1`.
pub fn generalized_eigenvalues(dim: usize, a: &Mat, g: &Mat) -> (f64, f64) {
    if dim == 1 {
        let mu = a[0][0] / g[0][0];
        return (mu, mu);
    }
    // det(A - μG) = det(G) μ² - (a11 g22 + a22 g11 - 2 a12 g12) μ + det(A)
    let qa = det(2, g);
    let qb = -(a[0][0] * g[1][1] + a[1][1] * g[0][0] - 2.0 * a[0][1] * g[0][1]);
    let qc = det(2, a);
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    // Numerically stable pair of roots.
    let sign = if qb >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (qb + sign * disc);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / qa, qc / q) };
    (r1.min(r2), r1.max(r2))
}

/// `g^{ij} α_i α_j`, the squared norm of a covector.
pub fn covector_norm_sq(dim: usize, g_inv: &Mat, a: &[f64; 2]) -> f64 {
    let mut s = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            s += g_inv[i][j] * a[i] * a[j];
        }
    }
    s
}

/// `g_ij v^i v^j`, the squared norm of a vector.
pub fn vector_norm_sq(dim: usize, g: &Mat, v: &[f64; 2]) -> f64 {
    covector_norm_sq(dim, g, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalized_eigenvalues_match_rayleigh_quotient_extrema() {
        let g = [[2.0, 0.3], [0.3, 1.0]];
        let a = [[1.0, -0.7], [-0.7, -0.5]];
        let (lo, hi) = generalized_eigenvalues(2, &a, &g);
        let (mut qmin, mut qmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..20000 {
            let th = k as f64 / 20000.0 * std::f64::consts::TAU;
            let x = [th.cos(), th.sin()];
            let q = vector_norm_sq(2, &a, &x) / vector_norm_sq(2, &g, &x);
            qmin = qmin.min(q);
            qmax = qmax.max(q);
        }
        assert!((lo - qmin).abs() < 1e-6 && (hi - qmax).abs() < 1e-6);
    }

    #[test]
    fn degenerate_forms() {
        assert_eq!(generalized_eigenvalues(2, &ZERO, &identity(2)), (0.0, 0.0));
        let (lo, hi) = generalized_eigenvalues(2, &[[0.0, 1.0], [1.0, 0.0]], &identity(2));
        assert!((lo + 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        let m = [[3.0, 1.0], [1.0, 2.0]];
        let p = mul(2, &m, &inverse(2, &m));
        assert!((p[0][0] - 1.0).abs() < 1e-15 && p[0][1].abs() < 1e-15);
    }
}
