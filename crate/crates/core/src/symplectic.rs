//! Covariance-matrix algebra for multi-mode Gaussian states.
//!
//! Conventions: quadratures are interleaved as (x1, p1, ..., xN, pN) and the
//! vacuum has unit variance, so the single-mode vacuum CM is the 2x2 identity.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Asymmetry beyond this (relative) is an error; below it is silently repaired.
const SYMMETRY_TOL: f64 = 1e-8;
/// Symplectic eigenvalues must exceed `1 - PHYSICAL_TOL`.
pub const PHYSICAL_TOL: f64 = 1e-9;

/// Real symmetric matrix of quadrature second moments of an N-mode state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Builds a CM from a 2N x 2N matrix, checking symmetry and positive
    /// definiteness. Physicality (symplectic eigenvalues >= 1) is *not*
    /// required here; see [`CovarianceMatrix::validate_physical`].
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim == 0 || dim % 2 != 0 || entries.ncols() != dim {
            return Err(Error::Usage(format!(
                "covariance matrix must be square with even dimension, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let scale = entries.amax().max(1.0);
        let mut max_asym = 0.0f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                max_asym = max_asym.max((entries[(i, j)] - entries[(j, i)]).abs());
            }
        }
        if max_asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidCm(format!(
                "asymmetry {max_asym:.3e} exceeds tolerance"
            )));
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        if sym.clone().cholesky().is_none() {
            return Err(Error::InvalidCm("matrix is not positive definite".into()));
        }
        Ok(Self {
            n_modes: dim / 2,
            entries: sym,
        })
    }

    /// Builds a CM and additionally checks that all symplectic eigenvalues
    /// are >= 1 within tolerance, i.e. that the matrix describes a state.
    pub fn new_physical(entries: DMatrix<f64>) -> Result<Self> {
        let cm = Self::new(entries)?;
        cm.validate_physical()?;
        Ok(cm)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Dimension of the matrix, `2 * n_modes`.
    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    /// Errors unless all symplectic eigenvalues are >= 1 - 1e-9.
    pub fn validate_physical(&self) -> Result<()> {
        let nus = symplectic_eigenvalues(self)?;
        match nus.first() {
            Some(&nu) if nu < 1.0 - PHYSICAL_TOL => Err(Error::InvalidCm(format!(
                "smallest symplectic eigenvalue {nu} < 1"
            ))),
            _ => Ok(()),
        }
    }
}

/// The standard symplectic form: block-diagonal [[0, 1], [-1, 0]] per mode.
#[derive(Debug, Clone)]
pub struct SymplecticForm {
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
        for i in 0..n_modes {
            m[(2 * i, 2 * i + 1)] = 1.0;
            m[(2 * i + 1, 2 * i)] = -1.0;
        }
        Self { n_modes, entries: m }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// A split of the mode indices `0..n_modes` into two disjoint nonempty groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeBipartition {
    n_modes: usize,
    group_a: Vec<usize>,
    group_b: Vec<usize>,
}

impl ModeBipartition {
    /// `group_a` lists the modes on one side; the complement forms the other.
    pub fn new(n_modes: usize, group_a: &[usize]) -> Result<Self> {
        let mut a: Vec<usize> = group_a.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.len() != group_a.len() {
            return Err(Error::Usage("bipartition group has repeated modes".into()));
        }
        if a.iter().any(|&m| m >= n_modes) {
            return Err(Error::Usage("bipartition mode index out of range".into()));
        }
        let b: Vec<usize> = (0..n_modes).filter(|m| !a.contains(m)).collect();
        if a.is_empty() || b.is_empty() {
            return Err(Error::Usage("bipartition groups must both be nonempty".into()));
        }
        Ok(Self { n_modes, group_a: a, group_b: b })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn group_a(&self) -> &[usize] {
        &self.group_a
    }

    pub fn group_b(&self) -> &[usize] {
        &self.group_b
    }

    /// True when one side consists of a single mode, the regime in which the
    /// Gaussian PPT criterion is necessary and sufficient.
    pub fn is_one_vs_rest(&self) -> bool {
        self.group_a.len() == 1 || self.group_b.len() == 1
    }
}

fn check_finite(r: f64) -> Result<()> {
    if r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("squeezing parameter must be finite, got {r}")))
    }
}

/// CM of a two-mode squeezed vacuum state with squeezing parameter `r`.
pub fn tmsv_cm(r: f64) -> Result<CovarianceMatrix> {
    check_finite(r)?;
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..4 {
        m[(i, i)] = c;
    }
    // sinh(2r) Z off-diagonal blocks, Z = diag(1, -1)
    m[(0, 2)] = s;
    m[(2, 0)] = s;
    m[(1, 3)] = -s;
    m[(3, 1)] = -s;
    CovarianceMatrix::new(m)
}

/// CM of a single-mode squeezed vacuum: diag(e^{2r}, e^{-2r}).
pub fn squeezed_cm(r: f64) -> Result<CovarianceMatrix> {
    check_finite(r)?;
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        (2.0 * r).exp(),
        (-2.0 * r).exp(),
    ]));
    CovarianceMatrix::new(m)
}

/// Embeds a two-mode CM on modes `(i, j)` of an `n`-mode identity background.
fn embed_two_mode(base: &CovarianceMatrix, i: usize, j: usize, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::identity(2 * n, 2 * n);
    let idx = [i, j];
    for (bi, &mi) in idx.iter().enumerate() {
        for (bj, &mj) in idx.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    m[(2 * mi + a, 2 * mj + b)] = base.entries()[(2 * bi + a, 2 * bj + b)];
                }
            }
        }
    }
    m
}

/// Three-mode CM built as the equal-weight mixture of the three placements of
/// a TMSV pair with a vacuum mode: (1/3) sum over pairs of (tmsv ⊕ 1).
pub fn fs_mixture_cm(r: f64) -> Result<CovarianceMatrix> {
    check_finite(r)?;
    let tmsv = tmsv_cm(r)?;
    let mut m = DMatrix::zeros(6, 6);
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        m += embed_two_mode(&tmsv, i, j, 3);
    }
    CovarianceMatrix::new(m / 3.0)
}

/// The three block CMs whose equal-weight mixture is [`fs_mixture_cm`],
/// ordered by the vacuum mode they leave out: tmsv on (0,1), (1,2), (0,2).
pub fn fs_mixture_components(r: f64) -> Result<Vec<CovarianceMatrix>> {
    check_finite(r)?;
    let tmsv = tmsv_cm(r)?;
    [(0, 1), (1, 2), (0, 2)]
        .into_iter()
        .map(|(i, j)| CovarianceMatrix::new(embed_two_mode(&tmsv, i, j, 3)))
        .collect()
}

/// Three-mode CM of the half/half mixture of tmsv_ab ⊕ sq_c and tmsv_bc ⊕ sq_a.
pub fn ps_mixture_cm(r: f64) -> Result<CovarianceMatrix> {
    check_finite(r)?;
    let tmsv = tmsv_cm(r)?;
    let sq = squeezed_cm(r)?;
    let mut term1 = embed_two_mode(&tmsv, 0, 1, 3);
    let mut term2 = embed_two_mode(&tmsv, 1, 2, 3);
    for a in 0..2 {
        for b in 0..2 {
            term1[(4 + a, 4 + b)] = sq.entries()[(a, b)];
            term2[(a, b)] = sq.entries()[(a, b)];
        }
    }
    CovarianceMatrix::new((term1 + term2) * 0.5)
}

/// Block-diagonal concatenation of CMs; mode counts add.
pub fn direct_sum(cms: &[CovarianceMatrix]) -> Result<CovarianceMatrix> {
    if cms.is_empty() {
        return Err(Error::Usage("direct_sum of an empty list".into()));
    }
    let n: usize = cms.iter().map(|c| c.n_modes()).sum();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    let mut off = 0;
    for cm in cms {
        let d = cm.dim();
        m.view_mut((off, off), (d, d)).copy_from(cm.entries());
        off += d;
    }
    CovarianceMatrix::new(m)
}

/// The N positive symplectic eigenvalues of a CM, ascending.
///
/// The eigenvalues of i*Omega*gamma coincide with those of the Hermitian
/// matrix i*K for K = sqrt(gamma)*Omega*sqrt(gamma) (similarity by
/// sqrt(gamma)), so nu^2 are the eigenvalues of the symmetric matrix K^T K,
/// each appearing twice. Only symmetric eigensolvers are involved, which
/// keeps the route unconditionally convergent.
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<Vec<f64>> {
    symplectic_eigenvalues_of(cm.entries(), cm.n_modes())
}

pub(crate) fn symplectic_eigenvalues_of(gamma: &DMatrix<f64>, n_modes: usize) -> Result<Vec<f64>> {
    let (vals, vecs) = crate::eigen::sym_eigen(gamma);
    if vals.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Numerical(
            "covariance matrix lost positive definiteness".into(),
        ));
    }
    let sqrt_vals = vals.map(|l| l.sqrt());
    let s = &vecs * DMatrix::from_diagonal(&sqrt_vals) * vecs.transpose();
    let omega = SymplecticForm::new(n_modes);
    let k = &s * omega.entries() * &s;
    let ktk = k.transpose() * &k;
    let mut nus: Vec<f64> = crate::eigen::sym_eigen(&ktk)
        .0
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    if nus.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigen-solver returned non-finite values".into()));
    }
    nus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // each nu appears twice (K is antisymmetric, singular values pair up)
    Ok(nus.into_iter().skip(1).step_by(2).collect())
}

/// Partial transposition at the CM level: flips the p quadrature of the
/// listed modes (gamma -> T gamma T). An involution.
pub fn partial_transpose_cm(cm: &CovarianceMatrix, modes: &[usize]) -> Result<CovarianceMatrix> {
    let n = cm.n_modes();
    let mut seen = vec![false; n];
    for &m in modes {
        if m >= n {
            return Err(Error::Usage(format!("mode index {m} out of range for {n} modes")));
        }
        seen[m] = true;
    }
    let mut t = cm.entries().clone();
    for (m, flagged) in seen.iter().enumerate() {
        if *flagged {
            let p = 2 * m + 1;
            for k in 0..2 * n {
                t[(p, k)] = -t[(p, k)];
            }
            for k in 0..2 * n {
                t[(k, p)] = -t[(k, p)];
            }
        }
    }
    CovarianceMatrix::new(t)
}

/// Verdict attached to a PPT symplectic test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PptVerdict {
    /// nu < 1: entangled across the bipartition.
    Entangled,
    /// nu >= 1 on a 1-vs-rest split, where PPT is necessary and sufficient.
    Separable,
    /// nu >= 1 on a balanced split: PPT alone cannot certify separability.
    InconclusiveIfNonnegative,
}

/// Result of [`ppt_min_symplectic_eigenvalue`].
#[derive(Debug, Clone, Copy)]
pub struct PptResult {
    pub nu_min: f64,
    pub verdict: PptVerdict,
}

/// Smallest symplectic eigenvalue of the partially transposed CM across a
/// bipartition. A value < 1 certifies entanglement.
pub fn ppt_min_symplectic_eigenvalue(
    cm: &CovarianceMatrix,
    bip: &ModeBipartition,
) -> Result<PptResult> {
    if bip.n_modes() != cm.n_modes() {
        return Err(Error::Usage("bipartition mode count does not match CM".into()));
    }
    // transposing the smaller side; either side gives the same spectrum
    let side = if bip.group_a().len() <= bip.group_b().len() {
        bip.group_a()
    } else {
        bip.group_b()
    };
    let pt = partial_transpose_cm(cm, side)?;
    let nus = symplectic_eigenvalues(&pt)?;
    let nu_min = nus[0];
    let verdict = if nu_min < 1.0 - PHYSICAL_TOL {
        PptVerdict::Entangled
    } else if bip.is_one_vs_rest() {
        PptVerdict::Separable
    } else {
        PptVerdict::InconclusiveIfNonnegative
    };
    Ok(PptResult { nu_min, verdict })
}

/// Purity of the Gaussian state with this CM: 1/sqrt(det gamma).
pub fn purity(cm: &CovarianceMatrix) -> Result<f64> {
    let det = cm.entries().determinant();
    if det <= 0.0 {
        return Err(Error::InvalidCm(format!("non-positive determinant {det}")));
    }
    Ok(1.0 / det.sqrt())
}

/// Minimum eigenvalue of the k-fold direct sum of the decomposition gap
/// gamma - sum_i p_i gamma_i. By block structure this equals the single-copy
/// value for every k, which is the multi-copy stability statement.
pub fn multi_copy_gap(
    cm: &CovarianceMatrix,
    decomposition: &[(f64, CovarianceMatrix)],
    k: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::Usage("copy count must be >= 1".into()));
    }
    let wsum: f64 = decomposition.iter().map(|(p, _)| p).sum();
    if decomposition.iter().any(|(p, _)| *p < 0.0) || (wsum - 1.0).abs() > 1e-9 {
        return Err(Error::Usage(format!(
            "weights must be nonnegative and sum to 1, got sum {wsum}"
        )));
    }
    let mut gap = cm.entries().clone();
    for (p, g) in decomposition {
        if g.dim() != cm.dim() {
            return Err(Error::Usage("decomposition CM dimension mismatch".into()));
        }
        gap -= g.entries() * *p;
    }
    let d = gap.nrows();
    let mut stacked = DMatrix::zeros(k * d, k * d);
    for c in 0..k {
        stacked.view_mut((c * d, c * d), (d, d)).copy_from(&gap);
    }
    Ok(crate::eigen::min_eig_sym(&stacked))
}

/// The closed-form smallest symplectic eigenvalue of the partial transpose of
/// [`fs_mixture_cm`] across any 1-vs-2 split, as a function of r.
pub fn fs_mixture_nu_tilde_minus(r: f64) -> f64 {
    let c2 = (2.0 * r).cosh();
    let c4 = (4.0 * r).cosh();
    let s2 = (2.0 * r).sinh();
    let inner = 2.0 * s2 * s2 * (199.0 + 256.0 * c2 + 121.0 * c4);
    ((9.0 + 16.0 * c2 + 11.0 * c4 - inner.sqrt()).max(0.0)).sqrt() / 6.0
}

/// Determinant of [`fs_mixture_cm`] in closed form.
pub fn fs_mixture_det(r: f64) -> f64 {
    let c2 = (2.0 * r).cosh();
    let c4 = (4.0 * r).cosh();
    let q = (7.0 + 8.0 * c2 + 3.0 * c4) / 54.0;
    (5.0 + 4.0 * c2) * q * q
}

/// The squeezing value at which [`fs_mixture_cm`] becomes separable:
/// arcosh((7 + 2 sqrt(31)) / 3) / 2.
pub fn fs_separability_threshold() -> f64 {
    0.5 * ((7.0 + 2.0 * 31.0f64.sqrt()) / 3.0).acosh()
}
