//! Closed-form results for the fully symmetric three-mode family: exact
//! matrix elements, the partial-transpose block spectra, and the specialized
//! two-copy activation check.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fock::C64;
use crate::symplectic::ModeBipartition;
use crate::witnesses::gabriel_criterion;

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Domain(format!(
            "lambda must lie in [0, 1), got {lambda}"
        )));
    }
    Ok(())
}

/// Exact (untruncated) matrix element <bra|rho|ket> of the fully symmetric
/// state with Fock level n. Each of the three placements contributes
/// (1/3)(1-l^2) l^{m+m'} iff its Kronecker pattern matches.
pub fn fs_matrix_element(n: usize, lambda: f64, bra: [usize; 3], ket: [usize; 3]) -> Result<f64> {
    check_lambda(lambda)?;
    let norm = (1.0 - lambda * lambda) / 3.0;
    let mut acc = 0.0;
    // placements: TMSV on (i, j), |n> on k
    for (i, j, k) in [(0usize, 1usize, 2usize), (0, 2, 1), (1, 2, 0)] {
        if bra[i] == bra[j] && ket[i] == ket[j] && bra[k] == n && ket[k] == n {
            acc += norm * lambda.powi((bra[i] + ket[i]) as i32);
        }
    }
    Ok(acc)
}

/// Eigenvalue pair of the m-th C-block of the partial transpose of the n=0
/// state: mu_m(+/-) = +/- (sqrt2/3)(1-l^2) l^m.
pub fn pt_block_eigenvalues(lambda: f64, m: usize) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    if m == 0 {
        return Err(Error::Usage("block index m must be >= 1".into()));
    }
    let mag = 2.0f64.sqrt() / 3.0 * (1.0 - lambda * lambda) * lambda.powi(m as i32);
    Ok((mag, -mag))
}

/// Normalized eigenvector of mu_m(-) in a three-mode Fock space with the
/// given cutoff: (|00m> + |0m0> - sqrt2 |m00>)/2.
pub fn pt_minus_eigenvector(m: usize, cutoff: usize) -> Result<DVector<C64>> {
    if m == 0 || m >= cutoff {
        return Err(Error::Usage(format!("need 1 <= m < cutoff, got m={m}")));
    }
    let dim = cutoff * cutoff * cutoff;
    let mut v = DVector::<C64>::zeros(dim);
    let flat = |a: usize, b: usize, c: usize| (a * cutoff + b) * cutoff + c;
    v[flat(0, 0, m)] = C64::new(0.5, 0.0);
    v[flat(0, m, 0)] = C64::new(0.5, 0.0);
    v[flat(m, 0, 0)] = C64::new(-0.5 * 2.0f64.sqrt(), 0.0);
    Ok(v)
}

#[derive(Debug, Clone, Copy)]
pub struct TwoCopyGabriel {
    pub lhs: f64,
    pub rhs: f64,
    pub violated: bool,
}

/// Two-copy Gabriel check for the fully symmetric family with the product
/// vector |n00 0n0> (x) |n11 1n1| spanning the two copies.
///
/// The closed forms are lhs = (1/9)(1-l^2)^2 l^2 and rhs = 0 (every
/// bipartition term contains a vanishing population); both are re-derived
/// through the generic two-copy evaluator on exact elements and must agree
/// to 1e-10.
pub fn gabriel_two_copy_fs(n: usize, lambda: f64) -> Result<TwoCopyGabriel> {
    check_lambda(lambda)?;
    let l2 = lambda * lambda;
    let lhs = (1.0 - l2) * (1.0 - l2) * l2 / 9.0;
    let rhs = 0.0;

    // generic-evaluator cross-derivation on the 6-mode two-copy state,
    // reading elements from a truncated single-copy density matrix (exact
    // for the finitely many Fock components involved)
    let cutoff = n.max(1) + 2;
    let single = crate::fock::fs_state_density(n, lambda, cutoff)?;
    let oracle = |bra: &[usize], ket: &[usize]| {
        let a = single.element(&bra[..3], &ket[..3]).unwrap();
        let b = single.element(&bra[3..], &ket[3..]).unwrap();
        a * b
    };
    // parties A = (A1, A2), B = (B1, B2), C = (C1, C2); per-copy layout
    // (A1, B1, C1, A2, B2, C2)
    let phi1 = vec![vec![n, 0], vec![0, n], vec![0, 0]];
    let phi2 = vec![vec![n, 1], vec![1, n], vec![1, 1]];
    let cuts: Vec<ModeBipartition> = (0..3)
        .map(|i| ModeBipartition::new(3, &[i]))
        .collect::<Result<_>>()?;

    // the oracle above addresses modes as (A1, B1, C1, A2, B2, C2), while the
    // party tuples flatten as (A1, A2, B1, B2, C1, C2); remap inside
    let remap = |t: &[usize]| [t[0], t[2], t[4], t[1], t[3], t[5]];
    let mapped = |bra: &[usize], ket: &[usize]| oracle(&remap(bra), &remap(ket));
    let (glhs, grhs) = gabriel_criterion(mapped, &phi1, &phi2, &cuts)?;
    if (glhs - lhs).abs() > 1e-10 || (grhs - rhs).abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "closed form and generic evaluator disagree: ({lhs}, {rhs}) vs ({glhs}, {grhs})"
        )));
    }

    Ok(TwoCopyGabriel {
        lhs,
        rhs,
        violated: lhs > rhs + 1e-15,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fs_state_density, partial_transpose, smallest_eigenpairs};
    use approx::assert_relative_eq;

    #[test]
    fn elements_match_examples() {
        let l = 0.5;
        for n in [0usize, 1, 3] {
            let v = fs_matrix_element(n, l, [n, 0, 0], [n, 1, 1]).unwrap();
            assert_relative_eq!(v, (1.0 - l * l) * l / 3.0, epsilon = 1e-15);
        }
        for n in [2usize, 3, 5] {
            assert_eq!(fs_matrix_element(n, l, [0, n, 1], [0, n, 1]).unwrap(), 0.0);
        }
        for n in [1usize, 2, 4] {
            assert_relative_eq!(
                fs_matrix_element(n, 0.0, [n, 0, 0], [n, 0, 0]).unwrap(),
                1.0 / 3.0
            );
        }
        assert!(fs_matrix_element(0, 1.0, [0; 3], [0; 3]).is_err());
    }

    #[test]
    fn elements_match_truncated_density() {
        let l = 0.45;
        let c = 5;
        for n in [0usize, 2] {
            let rho = fs_state_density(n, l, c).unwrap();
            for flat_b in 0..c * c * c {
                for flat_k in 0..c * c * c {
                    let d = |f: usize| [f / (c * c), (f / c) % c, f % c];
                    let b = d(flat_b);
                    let k = d(flat_k);
                    let exact = fs_matrix_element(n, l, b, k).unwrap();
                    let got = rho.element(&b, &k).unwrap();
                    assert!(
                        (got.re - exact).abs() < 1e-12 && got.im == 0.0,
                        "mismatch at {b:?} {k:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn pt_block_values() {
        assert_eq!(pt_block_eigenvalues(0.0, 1).unwrap(), (0.0, 0.0));
        let (_, minus) = pt_block_eigenvalues(0.5, 1).unwrap();
        assert_relative_eq!(minus, -0.17677669529663687, epsilon = 1e-12);
        for l in [0.1, 0.4, 0.65, 0.9] {
            for m in 1..=4 {
                let (p, mi) = pt_block_eigenvalues(l, m).unwrap();
                assert!(mi < 0.0 && p > 0.0 && p == -mi);
            }
        }
        assert!(pt_block_eigenvalues(0.5, 0).is_err());
    }

    #[test]
    fn pt_spectrum_numeric_cross_check() {
        // the three most negative PT eigenvalues at moderate cutoff are the
        // m = 1, 2, 3 block minima, with the predicted eigenvectors
        let l = 0.5;
        let cutoff = 8;
        let rho = fs_state_density(0, l, cutoff).unwrap();
        let pt = partial_transpose(&rho, &[0]).unwrap();
        let pairs = smallest_eigenpairs(&pt, 3).unwrap();
        for (idx, (val, vec)) in pairs.iter().enumerate() {
            let m = idx + 1;
            let (_, expect) = pt_block_eigenvalues(l, m).unwrap();
            assert_relative_eq!(*val, expect, epsilon = 1e-9);
            let model = pt_minus_eigenvector(m, cutoff).unwrap();
            let overlap = vec.dotc(&model).norm();
            assert!(overlap > 1.0 - 1e-9, "overlap {overlap} at m={m}");
        }
    }

    #[test]
    fn two_copy_gabriel_values() {
        let g = gabriel_two_copy_fs(0, 0.0).unwrap();
        assert_eq!((g.lhs, g.rhs, g.violated), (0.0, 0.0, false));

        let l = 1.0f64.tanh();
        let g = gabriel_two_copy_fs(0, l).unwrap();
        assert_relative_eq!(g.lhs, 0.011368, epsilon = 1e-4);
        assert_eq!(g.rhs, 0.0);
        assert!(g.violated);

        for i in 1..100 {
            let l = i as f64 / 100.0;
            for n in [0usize, 1, 2] {
                assert!(gabriel_two_copy_fs(n, l).unwrap().violated);
            }
        }
    }

    #[test]
    fn two_copy_lhs_is_maximal_at_lambda_sq_one_third() {
        let f = |l: f64| gabriel_two_copy_fs(0, l).unwrap().lhs;
        let star = (1.0f64 / 3.0).sqrt();
        let h = 1e-4;
        let deriv = (f(star + h) - f(star - h)) / (2.0 * h);
        assert!(deriv.abs() < 1e-6);
        assert!(f(star) > f(star + 0.05) && f(star) > f(star - 0.05));
    }
}
