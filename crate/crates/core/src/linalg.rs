//! Small fixed-size vector helpers and the dense routines needed for rank
//! and determinant diagnostics. Everything operates on plain arrays; the
//! matrices involved never exceed a dozen rows.

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    if n == 0.0 {
        a
    } else {
        scale(a, 1.0 / n)
    }
}

/// Component of `a` orthogonal to the unit vector `u`.
pub fn reject(a: Vec3, u: Vec3) -> Vec3 {
    sub(a, scale(u, dot(a, u)))
}

/// Deterministic orthonormal basis (e1, e2) of the plane orthogonal to the
/// unit vector `u`, built from the coordinate axis least aligned with `u`.
pub fn tangent_basis(u: Vec3) -> (Vec3, Vec3) {
    let ax = u[0].abs();
    let ay = u[1].abs();
    let az = u[2].abs();
    let seed = if ax <= ay && ax <= az {
        [1.0, 0.0, 0.0]
    } else if ay <= az {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let e1 = normalize(cross(u, seed));
    let e2 = cross(u, e1);
    (e1, e2)
}

/// Singular values of a dense row-major `rows x cols` matrix, descending.
///
/// Computed as square roots of the eigenvalues of the Gram matrix on the
/// smaller side, via cyclic Jacobi sweeps. Adequate for the tiny constraint
/// Jacobians this crate produces.
pub fn singular_values(a: &[Vec<f64>]) -> Vec<f64> {
    let rows = a.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = a[0].len();
    let k = rows.min(cols);
    // Gram matrix on the smaller side.
    let mut g = vec![vec![0.0; k]; k];
    if rows <= cols {
        for i in 0..rows {
            for j in 0..rows {
                g[i][j] = (0..cols).map(|c| a[i][c] * a[j][c]).sum();
            }
        }
    } else {
        for i in 0..cols {
            for j in 0..cols {
                g[i][j] = (0..rows).map(|r| a[r][i] * a[r][j]).sum();
            }
        }
    }
    let mut eig = symmetric_eigenvalues(&mut g);
    for v in eig.iter_mut() {
        *v = v.max(0.0).sqrt();
    }
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

/// Numeric rank: count of singular values above `tol` times the largest.
pub fn numeric_rank(a: &[Vec<f64>], tol: f64) -> usize {
    let sv = singular_values(a);
    match sv.first() {
        None | Some(&0.0) => 0,
        Some(&s0) => sv.iter().filter(|&&s| s > tol * s0).count(),
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
/// The input buffer is destroyed.
fn symmetric_eigenvalues(m: &mut [Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    if n == 0 {
        return Vec::new();
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-300 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[i][p];
                    let miq = m[i][q];
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for i in 0..n {
                    let mpi = m[p][i];
                    let mqi = m[q][i];
                    m[p][i] = c * mpi - s * mqi;
                    m[q][i] = s * mpi + c * mqi;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// Determinant of a square matrix by LU with partial pivoting.
pub fn determinant(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in (col + 1)..n {
            let factor = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    det
}
