//! Small dense helpers: spectral norm by power iteration and a cyclic Jacobi
//! eigensolver for symmetric matrices.

use crate::{Matrix, Vector};

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 10_000;

/// Operator 2-norm `sqrt(λ_max(AᵀA))`, by power iteration on `AᵀA`.
pub fn operator_norm(a: &Matrix) -> f64 {
    let n = a.ncols();
    if n == 0 || a.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    let ata = a.transpose() * a;
    // Deterministic start with a component along every axis.
    let mut v = Vector::from_fn(n, |i, _| 1.0 + 0.1 * i as f64);
    v.normalize_mut();
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let w = &ata * &v;
        let norm = w.norm();
        if norm == 0.0 {
            // Start vector in the kernel; fall back to the exact eigensolver.
            return symmetric_eigen(&ata).0.max().max(0.0).sqrt();
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= POWER_TOL * next.abs().max(1.0) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // Power iteration converges from below; guard the bound with the exact
    // eigenvalue when the two disagree noticeably.
    let exact = symmetric_eigen(&ata).0.max();
    lambda.max(exact).max(0.0).sqrt()
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors stored as columns,
/// eigenvalues in ascending order.
pub fn symmetric_eigen(a: &Matrix) -> (Vector, Matrix) {
    let n = a.nrows();
    let mut m = (a + a.transpose()) * 0.5;
    let mut vecs = Matrix::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)] * m[(p, q)])
            .sum();
        let scale: f64 = m.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = vecs[(k, p)];
                    let vkq = vecs[(k, q)];
                    vecs[(k, p)] = c * vkp - s * vkq;
                    vecs[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| m[(i, i)]));
    let vectors = Matrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    (values, vectors)
}

/// Determinant via partial-pivot LU; exact enough for the small orientation
/// tests of the degree engine.
pub fn determinant(a: &Matrix) -> f64 {
    a.clone().lu().determinant()
}
