//! Verified symmetric eigendecomposition.
//!
//! nalgebra's QR-based `symmetric_eigen` can silently return non-orthogonal
//! eigenvectors on matrices with degenerate eigenvalue clusters (correct
//! values, broken basis), which corrupts anything built from V D V^T. Every
//! decomposition here is therefore residual-checked, with a cyclic Jacobi
//! sweep as the fallback — slower, but unconditionally stable.

use nalgebra::{DMatrix, DVector};

/// Eigendecomposition of a (symmetrized) real matrix: ascending eigenvalues
/// and a matching orthonormal eigenvector matrix, verified to reconstruct
/// the input.
pub(crate) fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let scale = 1.0 + sym.amax();
    let eig = sym.clone().symmetric_eigen();
    let recon =
        &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues) * eig.eigenvectors.transpose();
    let (values, vectors) = if (recon - &sym).amax() <= 1e-10 * scale {
        (eig.eigenvalues, eig.eigenvectors)
    } else {
        jacobi_eigen(&sym)
    };
    sort_ascending(values, vectors)
}

fn sort_ascending(values: DVector<f64>, vectors: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted_values = DVector::from_fn(n, |i, _| values[order[i]]);
    let sorted_vectors = DMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    (sorted_values, sorted_vectors)
}

/// Cyclic Jacobi rotations; quadratically convergent and immune to the
/// degenerate-cluster issue.
pub(crate) fn jacobi_eigen(sym: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = sym.nrows();
    let mut a = sym.clone();
    let mut v = DMatrix::identity(n, n);
    let scale = 1.0 + sym.amax();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(a[(i, j)].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (a.diagonal(), v)
}

/// Smallest eigenvalue of the symmetrization of `m`, verified.
pub(crate) fn min_eig_sym(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m).0[0]
}
