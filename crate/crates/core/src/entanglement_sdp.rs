//! Entanglement-structure SDPs: the covariance-matrix biseparability
//! feasibility problem with its dual Gaussian GME witness, and the fully
//! decomposable witness for three-qubit states.
//!
//! The CM criterion asks for block-diagonal valid CMs `gamma_i` and convex
//! weights `p_i` with `gamma >= sum_i p_i gamma_i`. Substituting
//! `K_i = p_i gamma_i` makes every condition linear: `K_i + i p_i Omega >= 0`
//! (a Hermitian constraint, handled through its real embedding) together with
//! `gamma - sum_i K_i >= 0`. We maximise the margin `t` in
//! `gamma - sum_i K_i - t I >= 0`; the criterion is satisfied exactly when the
//! optimum is nonnegative, and the dual solution attached to the margin block
//! yields a witness `W >= 0` with `Tr(W gamma) < 1` on violation while
//! `Tr(W gamma_bs) >= 1` for every CM admitting such a decomposition.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::FockDensityMatrix;
use crate::sdp::{self, BlockKind, Constraint, SdpOptions, SdpProblem, SdpStatus};
use crate::symplectic::{
    direct_sum, fs_mixture_cm, ps_mixture_cm, CovarianceMatrix, ModeBipartition, SymplecticForm,
};

const PSD_TOL: f64 = 1e-7;

/// Rows of the full CM touched by a mode group, in interleaved ordering.
fn group_rows(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

fn submatrix(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows.len(), |i, j| m[(rows[i], rows[j])])
}

fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    crate::eigen::min_eig_sym(m)
}

/// min over valid `n`-mode CMs gamma of Tr(W gamma) for PSD W, which equals
/// twice the sum of the symplectic eigenvalues of W (continued to W with
/// kernel, where the infimum may not be attained). Computed through the
/// symmetric matrix (sqrt(W) Omega sqrt(W))^T (sqrt(W) Omega sqrt(W)), whose
/// eigenvalues are the squared symplectic eigenvalues, each twice.
fn symplectic_trace_bound(w: &DMatrix<f64>, n_modes: usize) -> f64 {
    let (vals, vecs) = crate::eigen::sym_eigen(w);
    let sqrt_vals = vals.map(|l| l.max(0.0).sqrt());
    let s = &vecs * DMatrix::from_diagonal(&sqrt_vals) * vecs.transpose();
    let omega = SymplecticForm::new(n_modes);
    let k = &s * omega.entries() * &s;
    let ktk = k.transpose() * &k;
    crate::eigen::sym_eigen(&ktk)
        .0
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum()
}

/// A Gaussian GME witness at the covariance-matrix level: a PSD matrix W
/// with Tr(W gamma_bs) >= 1 for every CM satisfying the biseparability
/// criterion over the declared bipartitions.
#[derive(Debug, Clone)]
pub struct CmWitness {
    pub matrix: DMatrix<f64>,
    /// Tr(W gamma_target) - 1; negative values certify that the target CM
    /// violates the biseparability criterion.
    pub value: f64,
}

impl CmWitness {
    pub fn evaluate(&self, gamma: &CovarianceMatrix) -> f64 {
        (&self.matrix * gamma.entries()).trace() - 1.0
    }

    /// min Tr(W gamma') over valid CMs gamma' that are block-diagonal with
    /// respect to the bipartition.
    pub fn inner_minimum(&self, bipartition: &ModeBipartition) -> f64 {
        let mut total = 0.0;
        for group in [bipartition.group_a(), bipartition.group_b()] {
            let rows = group_rows(group);
            total += symplectic_trace_bound(&submatrix(&self.matrix, &rows), group.len());
        }
        total
    }

    /// Checks PSD-ness and the normalization Tr(W gamma_i) >= 1 on every
    /// block-diagonal valid CM of every declared bipartition.
    pub fn validate(&self, bipartitions: &[ModeBipartition]) -> Result<()> {
        if min_symmetric_eigenvalue(&self.matrix) < -1e-8 {
            return Err(Error::Numerical("CM witness lost positivity".into()));
        }
        for bip in bipartitions {
            if self.inner_minimum(bip) < 1.0 - 1e-6 {
                return Err(Error::Numerical(
                    "CM witness under-normalized on a bipartition".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Outcome of the CM biseparability feasibility problem.
#[derive(Debug, Clone)]
pub enum CmBisepOutcome {
    Feasible {
        /// Convex weights p_i, one per bipartition.
        weights: Vec<f64>,
        /// The scaled block CMs K_i = p_i gamma_i (full-size, zero outside
        /// the bipartition's diagonal blocks).
        matrices: Vec<DMatrix<f64>>,
        /// Optimal margin t in gamma - sum K_i >= t I.
        margin: f64,
    },
    Infeasible { witness: CmWitness },
}

impl CmBisepOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, CmBisepOutcome::Feasible { .. })
    }

    /// Recovers gamma_i = K_i / p_i where the weight is meaningful; entries
    /// with p_i below 1e-9 are reported as None (bipartition unused).
    pub fn block_cms(&self) -> Option<Vec<Option<DMatrix<f64>>>> {
        match self {
            CmBisepOutcome::Feasible {
                weights, matrices, ..
            } => Some(
                weights
                    .iter()
                    .zip(matrices)
                    .map(|(&p, k)| if p > 1e-9 { Some(k / p) } else { None })
                    .collect(),
            ),
            CmBisepOutcome::Infeasible { .. } => None,
        }
    }
}

/// Variable bookkeeping for the margin SDP. Dual vector layout:
/// y[0] = t, y[1..nb] = p_0..p_{nb-2} (the last weight is substituted as
/// 1 - sum of the others), then one entry per upper-triangular element of
/// each K_i restricted to its bipartition's diagonal blocks.
struct BisepEncoding {
    n_bip: usize,
    dim: usize,
    /// Per bipartition: (global row, global col, local block index 0/1,
    /// local row, local col, dual index).
    k_entries: Vec<Vec<(usize, usize, usize, usize, usize, usize)>>,
}

fn build_bisep_problem(
    gamma: &CovarianceMatrix,
    bipartitions: &[ModeBipartition],
) -> Result<(SdpProblem, BisepEncoding)> {
    let nb = bipartitions.len();
    if nb < 2 {
        return Err(Error::Usage(
            "biseparability needs at least two bipartitions".into(),
        ));
    }
    for bip in bipartitions {
        if bip.n_modes() != gamma.n_modes() {
            return Err(Error::Usage(
                "bipartition mode count does not match the CM".into(),
            ));
        }
    }
    let dim = gamma.dim();

    // Blocks: [margin block] ++ [embedding A_i, embedding B_i]_i ++ [p_i]_i.
    let mut blocks = vec![(dim, BlockKind::Symmetric)];
    for bip in bipartitions {
        blocks.push((4 * bip.group_a().len(), BlockKind::HermitianEmbedded));
        blocks.push((4 * bip.group_b().len(), BlockKind::HermitianEmbedded));
    }
    for _ in 0..nb {
        blocks.push((1, BlockKind::Symmetric));
    }
    let n_blocks = blocks.len();
    let emb_block = |i: usize, g: usize| 1 + 2 * i + g;
    let p_block = |i: usize| 1 + 2 * nb + i;

    let mut problem = SdpProblem::new(blocks);

    // Objective (the dual slack's constant part): gamma on the margin block,
    // the substituted weight's symplectic terms on the last bipartition's
    // embeddings, and 1 on its scalar block.
    for i in 0..dim {
        for j in i..dim {
            problem.set_objective(0, i, j, gamma.entries()[(i, j)]);
        }
    }
    let omega_terms = |group: &[usize]| -> Vec<(usize, usize, f64)> {
        // Upper-right block of [[0, -Omega], [Omega, 0]] for the group-local
        // symplectic form; the mirrored lower-left entries follow by symmetry.
        let d = 2 * group.len();
        let omega = SymplecticForm::new(group.len());
        let mut out = Vec::new();
        for a in 0..d {
            for b in 0..d {
                let v = omega.entries()[(a, b)];
                if v != 0.0 {
                    out.push((a, d + b, -v));
                }
            }
        }
        out
    };
    let last = nb - 1;
    for (g, group) in [bipartitions[last].group_a(), bipartitions[last].group_b()]
        .into_iter()
        .enumerate()
    {
        for (a, b, v) in omega_terms(group) {
            problem.set_objective(emb_block(last, g), a, b, v);
        }
    }
    problem.set_objective(p_block(last), 0, 0, 1.0);

    // Margin variable t: maximised, subtracts the identity from block 0.
    let mut c_t = Constraint::new(n_blocks);
    for i in 0..dim {
        c_t.set(0, i, i, 1.0);
    }
    problem.add_constraint(c_t, 1.0);

    // Weights p_i, i < nb-1. Each adds p_i Omega to its own embeddings,
    // removes the same amount from the last bipartition's embeddings (via the
    // substitution p_last = 1 - sum), and appears in the scalar blocks.
    for i in 0..nb - 1 {
        let mut c = Constraint::new(n_blocks);
        for (g, group) in [bipartitions[i].group_a(), bipartitions[i].group_b()]
            .into_iter()
            .enumerate()
        {
            for (a, b, v) in omega_terms(group) {
                c.set(emb_block(i, g), a, b, -v);
            }
        }
        for (g, group) in [bipartitions[last].group_a(), bipartitions[last].group_b()]
            .into_iter()
            .enumerate()
        {
            for (a, b, v) in omega_terms(group) {
                c.set(emb_block(last, g), a, b, v);
            }
        }
        c.set(p_block(i), 0, 0, -1.0);
        c.set(p_block(last), 0, 0, 1.0);
        problem.add_constraint(c, 0.0);
    }

    // K_i entries: subtracted from the margin block, placed on both diagonal
    // copies of the bipartition's embeddings.
    let mut k_entries = Vec::with_capacity(nb);
    let mut next = problem.constraints.len();
    for (i, bip) in bipartitions.iter().enumerate() {
        let mut list = Vec::new();
        for (g, group) in [bip.group_a(), bip.group_b()].into_iter().enumerate() {
            let rows = group_rows(group);
            let d = rows.len();
            for la in 0..d {
                for lb in la..d {
                    let mut c = Constraint::new(n_blocks);
                    c.set(0, rows[la], rows[lb], 1.0);
                    c.set(emb_block(i, g), la, lb, -1.0);
                    c.set(emb_block(i, g), d + la, d + lb, -1.0);
                    problem.add_constraint(c, 0.0);
                    list.push((rows[la], rows[lb], g, la, lb, next));
                    next += 1;
                }
            }
        }
        k_entries.push(list);
    }

    Ok((
        problem,
        BisepEncoding {
            n_bip: nb,
            dim,
            k_entries,
        },
    ))
}

fn witness_from_solution(
    x0: &DMatrix<f64>,
    gamma: &CovarianceMatrix,
    bipartitions: &[ModeBipartition],
) -> Result<CmWitness> {
    let w0 = (x0 + x0.transpose()) * 0.5;
    let mut norm = f64::INFINITY;
    for bip in bipartitions {
        let mut total = 0.0;
        for group in [bip.group_a(), bip.group_b()] {
            let rows = group_rows(group);
            total += symplectic_trace_bound(&submatrix(&w0, &rows), group.len());
        }
        norm = norm.min(total);
    }
    if !(norm > 1e-12) {
        return Err(Error::Numerical(
            "degenerate dual certificate in the CM witness extraction".into(),
        ));
    }
    let matrix = w0 / norm;
    let value = (&matrix * gamma.entries()).trace() - 1.0;
    Ok(CmWitness { matrix, value })
}

fn solve_bisep(
    gamma: &CovarianceMatrix,
    bipartitions: &[ModeBipartition],
    options: &SdpOptions,
) -> Result<(sdp::SdpSolution, BisepEncoding)> {
    let (problem, enc) = build_bisep_problem(gamma, bipartitions)?;
    let solution = sdp::solve(&problem, options)?;
    match solution.status {
        SdpStatus::Optimal => Ok((solution, enc)),
        SdpStatus::Infeasible | SdpStatus::NumericalFailure => Err(Error::Numerical(format!(
            "margin SDP did not reach optimality: {}",
            solution.diagnostics
        ))),
    }
}

/// Decides the CM biseparability criterion for `gamma` over the given
/// bipartitions, returning either a certified decomposition or a dual
/// witness.
pub fn cm_bisep_feasibility(
    gamma: &CovarianceMatrix,
    bipartitions: &[ModeBipartition],
) -> Result<CmBisepOutcome> {
    cm_bisep_feasibility_with(gamma, bipartitions, &SdpOptions::default())
}

/// [`cm_bisep_feasibility`] with explicit solver options.
pub fn cm_bisep_feasibility_with(
    gamma: &CovarianceMatrix,
    bipartitions: &[ModeBipartition],
    options: &SdpOptions,
) -> Result<CmBisepOutcome> {
    let (solution, enc) = solve_bisep(gamma, bipartitions, options)?;
    let margin = solution.y[0];
    if margin < -PSD_TOL {
        let witness = witness_from_solution(&solution.x[0], gamma, bipartitions)?;
        witness.validate(bipartitions)?;
        return Ok(CmBisepOutcome::Infeasible { witness });
    }

    let nb = enc.n_bip;
    let mut weights: Vec<f64> = (0..nb - 1).map(|i| solution.y[1 + i].max(0.0)).collect();
    weights.push((1.0 - weights.iter().sum::<f64>()).max(0.0));
    let mut matrices = Vec::with_capacity(nb);
    for list in &enc.k_entries {
        let mut k = DMatrix::zeros(enc.dim, enc.dim);
        for &(row, col, _, _, _, idx) in list {
            k[(row, col)] = solution.y[idx];
            k[(col, row)] = solution.y[idx];
        }
        matrices.push(k);
    }

    // Re-verify the certificate outside the solver: the residual CM must be
    // PSD and every K_i + i p_i Omega must be PSD (checked on the real
    // embedding [[K, -p Omega], [p Omega, K]]).
    let mut residual = gamma.entries().clone();
    for k in &matrices {
        residual -= k;
    }
    if min_symmetric_eigenvalue(&residual) < -PSD_TOL {
        return Err(Error::Numerical(
            "feasibility certificate failed PSD re-verification".into(),
        ));
    }
    let omega = SymplecticForm::new(gamma.n_modes());
    for (k, &p) in matrices.iter().zip(&weights) {
        let mut emb = DMatrix::zeros(2 * enc.dim, 2 * enc.dim);
        emb.view_mut((0, 0), (enc.dim, enc.dim)).copy_from(k);
        emb.view_mut((enc.dim, enc.dim), (enc.dim, enc.dim))
            .copy_from(k);
        emb.view_mut((0, enc.dim), (enc.dim, enc.dim))
            .copy_from(&(omega.entries() * -p));
        emb.view_mut((enc.dim, 0), (enc.dim, enc.dim))
            .copy_from(&(omega.entries() * p));
        if min_symmetric_eigenvalue(&emb) < -PSD_TOL {
            return Err(Error::Numerical(
                "scaled block CM failed validity re-verification".into(),
            ));
        }
    }

    Ok(CmBisepOutcome::Feasible {
        weights,
        matrices,
        margin,
    })
}

/// Extracts the optimal CM-level GME witness for `gamma`, whether or not the
/// criterion is violated. The reported value Tr(W gamma) - 1 is negative
/// exactly when GME is detected at the CM level.
pub fn optimal_cm_witness(
    gamma: &CovarianceMatrix,
    bipartitions: &[ModeBipartition],
) -> Result<CmWitness> {
    optimal_cm_witness_with(gamma, bipartitions, &SdpOptions::default())
}

/// [`optimal_cm_witness`] with explicit solver options.
pub fn optimal_cm_witness_with(
    gamma: &CovarianceMatrix,
    bipartitions: &[ModeBipartition],
    options: &SdpOptions,
) -> Result<CmWitness> {
    let (solution, _) = solve_bisep(gamma, bipartitions, options)?;
    let witness = witness_from_solution(&solution.x[0], gamma, bipartitions)?;
    witness.validate(bipartitions)?;
    Ok(witness)
}

/// The compound six-mode state of the pair-activation test: one copy of the
/// symmetric FS mixture at r1 next to one copy of the partition-symmetric
/// mixture at r2.
pub fn pair_compound_cm(r1: f64, r2: f64) -> Result<CovarianceMatrix> {
    direct_sum(&[fs_mixture_cm(r1)?, ps_mixture_cm(r2)?])
}

/// The pairwise grouping {A,a} | {B,b} | {C,c} of the compound state's six
/// modes, as the three one-group-vs-rest bipartitions.
pub fn pair_bipartitions() -> Vec<ModeBipartition> {
    (0..3)
        .map(|i| ModeBipartition::new(6, &[i, i + 3]).expect("static bipartition"))
        .collect()
}

/// Witness value for a single grid point of the pair-activation scan.
pub fn pair_activation_point(r1: f64, r2: f64) -> Result<f64> {
    let gamma = pair_compound_cm(r1, r2)?;
    Ok(optimal_cm_witness(&gamma, &pair_bipartitions())?.value)
}

#[derive(Debug, Clone)]
pub struct PairScanPoint {
    pub r1: f64,
    pub r2: f64,
    /// Tr(W gamma) - 1, or None if the solve failed at this point.
    pub value: Option<f64>,
    pub status: String,
}

/// Scans the compound state over the Cartesian product of the two grids.
/// Points are solved independently on `jobs` workers; the output is ordered
/// by (r1 index, r2 index) regardless of completion order, and per-point
/// failures are recorded without aborting the scan.
pub fn pair_activation_scan(r1_grid: &[f64], r2_grid: &[f64], jobs: usize) -> Vec<PairScanPoint> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    let points: Vec<(f64, f64)> = r1_grid
        .iter()
        .flat_map(|&r1| r2_grid.iter().map(move |&r2| (r1, r2)))
        .collect();
    let results: Mutex<Vec<Option<PairScanPoint>>> = Mutex::new(vec![None; points.len()]);
    let cursor = AtomicUsize::new(0);
    let workers = jobs.max(1).min(points.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = cursor.fetch_add(1, Ordering::Relaxed);
                if idx >= points.len() {
                    break;
                }
                let (r1, r2) = points[idx];
                let record = match pair_activation_point(r1, r2) {
                    Ok(value) => PairScanPoint {
                        r1,
                        r2,
                        value: Some(value),
                        status: "ok".into(),
                    },
                    Err(e) => PairScanPoint {
                        r1,
                        r2,
                        value: None,
                        status: format!("failed: {e}"),
                    },
                };
                results.lock().expect("scan worker panicked")[idx] = Some(record);
            });
        }
    });

    results
        .into_inner()
        .expect("scan worker panicked")
        .into_iter()
        .map(|r| r.expect("scan slot left unfilled"))
        .collect()
}

// ---------------------------------------------------------------------------
// Fully decomposable three-qubit witness
// ---------------------------------------------------------------------------

/// Partial transpose of an 8x8 three-qubit matrix on one qubit.
pub fn qubit_partial_transpose(m: &DMatrix<f64>, qubit: usize) -> DMatrix<f64> {
    assert!(qubit < 3, "three-qubit partial transpose");
    assert_eq!(m.nrows(), 8);
    assert_eq!(m.ncols(), 8);
    let stride = 1usize << (2 - qubit);
    DMatrix::from_fn(8, 8, |a, b| {
        let (ba, bb) = ((a / stride) % 2, (b / stride) % 2);
        let ap = a - ba * stride + bb * stride;
        let bp = b - bb * stride + ba * stride;
        m[(ap, bp)]
    })
}

/// A fully decomposable GME witness for a three-qubit state: W = P_M +
/// Q_M^{T_M} with P_M, Q_M >= 0 for each of the three one-vs-two
/// bipartitions M, normalized to Tr(W) = 1.
#[derive(Debug, Clone)]
pub struct QubitGmeWitness {
    pub w: DMatrix<f64>,
    /// (P_M, Q_M) for M = qubit 0, 1, 2 versus the rest.
    pub decompositions: Vec<(DMatrix<f64>, DMatrix<f64>)>,
}

impl QubitGmeWitness {
    pub fn validate(&self) -> Result<()> {
        if (self.w.trace() - 1.0).abs() > 1e-8 {
            return Err(Error::Numerical("witness trace drifted from 1".into()));
        }
        for (m, (p, q)) in self.decompositions.iter().enumerate() {
            if min_symmetric_eigenvalue(p) < -1e-8 || min_symmetric_eigenvalue(q) < -1e-8 {
                return Err(Error::Numerical(
                    "witness decomposition lost positivity".into(),
                ));
            }
            let rebuilt = p + qubit_partial_transpose(q, m);
            let gap = (&self.w - rebuilt).amax();
            if gap > 1e-7 {
                return Err(Error::Numerical(
                    "witness decomposition does not reassemble".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Minimizes Tr(W rho) over fully decomposable witnesses with Tr(W) = 1.
/// A negative optimum certifies genuine multipartite entanglement of the
/// three-qubit state `rho`.
pub fn fully_decomposable_witness(rho: &FockDensityMatrix) -> Result<(QubitGmeWitness, f64)> {
    fully_decomposable_witness_with(rho, &SdpOptions::default())
}

/// [`fully_decomposable_witness`] with explicit solver options.
pub fn fully_decomposable_witness_with(
    rho: &FockDensityMatrix,
    options: &SdpOptions,
) -> Result<(QubitGmeWitness, f64)> {
    if rho.mode_dims() != [2, 2, 2] {
        return Err(Error::Usage(
            "fully decomposable witness expects a (2, 2, 2) state".into(),
        ));
    }
    let entries = rho.entries();
    let max_imag = entries.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > 1e-10 {
        return Err(Error::Usage(
            "only real three-qubit density matrices are supported".into(),
        ));
    }
    let rho_re = entries.map(|z| z.re);

    // Primal blocks (P_0, Q_0, P_1, Q_1, P_2, Q_2); W is implicitly
    // P_0 + Q_0^{T_0} and tied to the other two decompositions entrywise.
    let mut problem = SdpProblem::new(vec![(8, BlockKind::Symmetric); 6]);
    for i in 0..8 {
        for j in i..8 {
            problem.set_objective(0, i, j, rho_re[(i, j)]);
        }
    }
    let rho_t0 = qubit_partial_transpose(&rho_re, 0);
    for i in 0..8 {
        for j in i..8 {
            problem.set_objective(1, i, j, rho_t0[(i, j)]);
        }
    }

    // Index map of the partial transpose: entry (a, b) of Q^{T_m} reads
    // Q at the bit-swapped pair. Diagonal pairs stay diagonal, so each
    // equality row scales uniformly under the mirrored entry convention.
    let pt_pair = |a: usize, b: usize, m: usize| -> (usize, usize) {
        let stride = 1usize << (2 - m);
        let (ba, bb) = ((a / stride) % 2, (b / stride) % 2);
        (
            a - ba * stride + bb * stride,
            b - bb * stride + ba * stride,
        )
    };
    for m in 1..3 {
        for a in 0..8 {
            for b in a..8 {
                let mut c = Constraint::new(6);
                c.set(0, a, b, 1.0);
                let (qa, qb) = pt_pair(a, b, 0);
                c.set(1, qa, qb, 1.0);
                c.set(2 * m, a, b, -1.0);
                let (qa, qb) = pt_pair(a, b, m);
                c.set(2 * m + 1, qa, qb, -1.0);
                problem.add_constraint(c, 0.0);
            }
        }
    }
    let mut trace = Constraint::new(6);
    for a in 0..8 {
        trace.set(0, a, a, 1.0);
        trace.set(1, a, a, 1.0);
    }
    problem.add_constraint(trace, 1.0);

    let solution = sdp::solve(&problem, options)?;
    if solution.status != SdpStatus::Optimal {
        return Err(Error::Numerical(format!(
            "fully decomposable witness SDP failed: {}",
            solution.diagnostics
        )));
    }

    let sym = |m: &DMatrix<f64>| (m + m.transpose()) * 0.5;
    let p0 = sym(&solution.x[0]);
    let q0 = sym(&solution.x[1]);
    let w = &p0 + qubit_partial_transpose(&q0, 0);
    let witness = QubitGmeWitness {
        w,
        decompositions: (0..3)
            .map(|m| (sym(&solution.x[2 * m]), sym(&solution.x[2 * m + 1])))
            .collect(),
    };
    witness.validate()?;
    let optimum = (&witness.w * &rho_re).trace();
    Ok((witness, optimum))
}
