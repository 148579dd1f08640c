//! Dense primal-dual interior-point solver for small block-diagonal
//! semidefinite programs in standard form:
//!
//! ```text
//! min <C, X>   s.t.  <A_j, X> = b_j,  X >= 0 (blockwise),
//! ```
//!
//! with the dual  max b^T y  s.t.  S = C - sum_j y_j A_j >= 0.
//!
//! Search directions are HKM-scaled with a Mehrotra predictor-corrector;
//! the Schur complement is assembled from sparse constraint entries, so
//! constraints touching few matrix entries stay cheap even when there are
//! hundreds of them.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// How a PSD block is to be interpreted by the caller. Hermitian constraints
/// H = A + iB >= 0 enter through the real embedding [[A, -B], [B, A]] >= 0
/// and are marked accordingly; the solver treats both kinds identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Symmetric,
    HermitianEmbedded,
}

/// Sparse symmetric coefficient matrix over the problem's blocks. Entries
/// are stored fully mirrored.
#[derive(Debug, Clone)]
pub struct Constraint {
    entries: Vec<Vec<(usize, usize, f64)>>,
}

impl Constraint {
    pub fn new(n_blocks: usize) -> Self {
        Self {
            entries: vec![Vec::new(); n_blocks],
        }
    }

    /// Sets the symmetric coefficient pair (i, j) and (j, i) of a block.
    pub fn set(&mut self, block: usize, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        self.entries[block].push((i, j, v));
        if i != j {
            self.entries[block].push((j, i, v));
        }
    }

    pub fn entries(&self) -> &[Vec<(usize, usize, f64)>] {
        &self.entries
    }

    fn dot_block(&self, block: usize, m: &DMatrix<f64>) -> f64 {
        self.entries[block]
            .iter()
            .map(|&(i, j, v)| v * m[(j, i)])
            .sum()
    }

    /// <A, M> over all blocks (uses M[(j, i)], valid for symmetric A even
    /// when M itself is not symmetric).
    fn dot(&self, mats: &[DMatrix<f64>]) -> f64 {
        (0..self.entries.len())
            .map(|b| self.dot_block(b, &mats[b]))
            .sum()
    }

    fn add_into(&self, mats: &mut [DMatrix<f64>], scale: f64) {
        for (b, list) in self.entries.iter().enumerate() {
            for &(i, j, v) in list {
                mats[b][(i, j)] += scale * v;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub blocks: Vec<(usize, BlockKind)>,
    pub objective: Vec<DMatrix<f64>>,
    pub constraints: Vec<Constraint>,
    pub rhs: Vec<f64>,
}

impl SdpProblem {
    pub fn new(blocks: Vec<(usize, BlockKind)>) -> Self {
        let objective = blocks.iter().map(|&(d, _)| DMatrix::zeros(d, d)).collect();
        Self {
            blocks,
            objective,
            constraints: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Sets a symmetric objective entry (both (i,j) and (j,i)).
    pub fn set_objective(&mut self, block: usize, i: usize, j: usize, v: f64) {
        self.objective[block][(i, j)] = v;
        self.objective[block][(j, i)] = v;
    }

    pub fn add_constraint(&mut self, c: Constraint, rhs: f64) {
        self.constraints.push(c);
        self.rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Usage("problem has no blocks".into()));
        }
        for (b, &(d, kind)) in self.blocks.iter().enumerate() {
            if d == 0 {
                return Err(Error::Usage("zero-sized block".into()));
            }
            if kind == BlockKind::HermitianEmbedded && d % 2 != 0 {
                return Err(Error::Usage(
                    "hermitian-embedded blocks must have even size".into(),
                ));
            }
            let o = &self.objective[b];
            if o.nrows() != d || o.ncols() != d {
                return Err(Error::Usage("objective block dimension mismatch".into()));
            }
            if (o - o.transpose()).amax() > 1e-12 {
                return Err(Error::Usage("objective block not symmetric".into()));
            }
        }
        if self.constraints.len() != self.rhs.len() {
            return Err(Error::Usage("constraint/rhs count mismatch".into()));
        }
        for c in &self.constraints {
            if c.entries.len() != self.blocks.len() {
                return Err(Error::Usage("constraint block count mismatch".into()));
            }
            for (b, list) in c.entries.iter().enumerate() {
                let d = self.blocks[b].0;
                if list.iter().any(|&(i, j, _)| i >= d || j >= d) {
                    return Err(Error::Usage("constraint entry out of block range".into()));
                }
            }
        }
        Ok(())
    }

    fn zeros(&self) -> Vec<DMatrix<f64>> {
        self.blocks
            .iter()
            .map(|&(d, _)| DMatrix::zeros(d, d))
            .collect()
    }

    fn identity(&self, scale: f64) -> Vec<DMatrix<f64>> {
        self.blocks
            .iter()
            .map(|&(d, _)| DMatrix::identity(d, d) * scale)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    /// Primal infeasible; an improving dual ray is attached as certificate.
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<DMatrix<f64>>,
    pub y: Vec<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    /// Improving dual ray on infeasibility: b^T ray > 0 while
    /// -sum_j ray_j A_j >= 0.
    pub certificate: Option<Vec<f64>>,
    pub diagnostics: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iterations: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            gap_tol: 1e-7,
            max_iterations: 200,
        }
    }
}

fn block_dot(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y.iter()).map(|(p, q)| p * q).sum::<f64>())
        .sum()
}

/// Largest alpha in (0, 1] with M + alpha*D >= 0, via the spectrum of
/// L^-1 D L^-T where M = L L^T.
fn max_step(m: &[DMatrix<f64>], d: &[DMatrix<f64>]) -> f64 {
    let mut alpha: f64 = 1.0;
    for (mb, db) in m.iter().zip(d) {
        let chol = match mb.clone().cholesky() {
            Some(c) => c,
            None => return 0.0,
        };
        let l = chol.l();
        // W = L^-1 D L^-T
        let tmp = l.solve_lower_triangular(db).unwrap_or_else(|| db.clone());
        let w = l
            .solve_lower_triangular(&tmp.transpose())
            .unwrap_or(tmp.transpose());
        let w = (w.clone() + w.transpose()) * 0.5;
        let lam_min = w
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if lam_min < 0.0 {
            alpha = alpha.min(-1.0 / lam_min);
        }
    }
    alpha
}

/// Halves alpha until base + alpha*dir factors as PD on every block, so a
/// slightly overshooting line search cannot leave the cone numerically.
fn shrink_to_cone(base: &[DMatrix<f64>], dir: &[DMatrix<f64>], mut alpha: f64) -> f64 {
    for _ in 0..50 {
        if alpha < 1e-14 {
            return 0.0;
        }
        let ok = base.iter().zip(dir).all(|(b, d)| {
            let t = b + d * alpha;
            ((&t + t.transpose()) * 0.5).cholesky().is_some()
        });
        if ok {
            return alpha;
        }
        alpha *= 0.5;
    }
    0.0
}

struct Workspace {
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    y: Vec<f64>,
}

pub fn solve(problem: &SdpProblem, options: &SdpOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let m = problem.constraints.len();
    let n_total: usize = problem.blocks.iter().map(|&(d, _)| d).sum();

    // starting point: scaled identities, zero multipliers
    let data_scale = problem
        .objective
        .iter()
        .map(|o| o.amax())
        .fold(1.0f64, f64::max)
        .max(problem.rhs.iter().fold(0.0f64, |a, &b| a.max(b.abs())));
    let tau = 10.0f64.max(data_scale);
    let mut w = Workspace {
        x: problem.identity(tau),
        s: problem.identity(tau),
        y: vec![0.0; m],
    };

    let b_norm = 1.0 + problem.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c_norm = 1.0 + problem.objective.iter().map(|o| o.amax()).fold(0.0, f64::max);

    let mut diagnostics = String::new();
    let mut best_merit = f64::INFINITY;
    let mut stall = 0usize;
    for iter in 0..options.max_iterations {
        // residuals
        let rp: Vec<f64> = (0..m)
            .map(|j| problem.rhs[j] - problem.constraints[j].dot(&w.x))
            .collect();
        let mut rd = problem.objective.clone();
        for (bm, sb) in rd.iter_mut().zip(&w.s) {
            *bm -= sb;
        }
        for j in 0..m {
            problem.constraints[j].add_into(&mut rd, -w.y[j]);
        }

        let mu = block_dot(&w.x, &w.s) / n_total as f64;
        let pobj = block_dot(&problem.objective, &w.x);
        let dobj: f64 = problem.rhs.iter().zip(&w.y).map(|(b, y)| b * y).sum();
        let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / b_norm;
        let dinf = rd.iter().map(|r| r.amax()).fold(0.0, f64::max) / c_norm;
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if iter % 25 == 0 {
            let _ = writeln!(
                diagnostics,
                "iter {iter}: mu {mu:.3e} pinf {pinf:.3e} dinf {dinf:.3e} gap {gap:.3e}"
            );
        }

        if pinf < options.feas_tol && dinf < options.feas_tol && gap < options.gap_tol {
            return Ok(SdpSolution {
                status: SdpStatus::Optimal,
                x: w.x,
                y: w.y,
                s: w.s,
                primal_objective: pobj,
                dual_objective: dobj,
                iterations: iter,
                certificate: None,
                diagnostics,
            });
        }

        // Ill-conditioned instances can hit an accuracy floor above the
        // target tolerances; once progress stalls, accept the plateau if it
        // is within three orders of magnitude of the tolerances.
        let merit = pinf.max(dinf).max(gap);
        if merit < 0.9 * best_merit {
            best_merit = merit;
            stall = 0;
        } else {
            stall += 1;
        }
        if stall >= 20 {
            let acceptable = pinf < 1e3 * options.feas_tol
                && dinf < 1e3 * options.feas_tol
                && gap < 1e3 * options.gap_tol;
            let _ = writeln!(
                diagnostics,
                "stalled at iteration {iter} (pinf {pinf:.3e} dinf {dinf:.3e} gap {gap:.3e})"
            );
            let status = if acceptable {
                let _ = writeln!(diagnostics, "accepted at reduced accuracy");
                SdpStatus::Optimal
            } else {
                SdpStatus::NumericalFailure
            };
            return Ok(SdpSolution {
                status,
                x: w.x,
                y: w.y,
                s: w.s,
                primal_objective: pobj,
                dual_objective: dobj,
                iterations: iter,
                certificate: None,
                diagnostics,
            });
        }

        // primal-infeasibility heuristic: diverging multipliers with a
        // near-feasible improving ray
        let y_norm = w.y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if y_norm > 1e9 * b_norm && dobj > 1e6 * b_norm {
            let ray: Vec<f64> = w.y.iter().map(|v| v / y_norm).collect();
            return Ok(SdpSolution {
                status: SdpStatus::Infeasible,
                x: w.x,
                y: w.y.clone(),
                s: w.s,
                primal_objective: pobj,
                dual_objective: dobj,
                iterations: iter,
                certificate: Some(ray),
                diagnostics,
            });
        }

        // factor S and X
        let s_chol: Vec<_> = w
            .s
            .iter()
            .map(|sb| sb.clone().cholesky())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Numerical("dual block lost positive definiteness".into()))?;
        let s_inv: Vec<DMatrix<f64>> = s_chol.iter().map(|c| c.inverse()).collect();

        // Schur complement M_jk = 1/2 [tr(Aj X Ak S^-1) + tr(Aj S^-1 Ak X)]
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for j in 0..m {
            for k in j..m {
                let mut acc = 0.0;
                for b in 0..problem.n_blocks() {
                    let ej = &problem.constraints[j].entries[b];
                    let ek = &problem.constraints[k].entries[b];
                    if ej.is_empty() || ek.is_empty() {
                        continue;
                    }
                    let xb = &w.x[b];
                    let ib = &s_inv[b];
                    for &(a1, b1, v1) in ej {
                        for &(a2, b2, v2) in ek {
                            acc += 0.5
                                * v1
                                * v2
                                * (xb[(b1, a2)] * ib[(b2, a1)] + ib[(b1, a2)] * xb[(b2, a1)]);
                        }
                    }
                }
                schur[(j, k)] = acc;
                schur[(k, j)] = acc;
            }
        }
        let schur_chol = {
            let mut ridge = 0.0;
            loop {
                let trial = if ridge == 0.0 {
                    schur.clone()
                } else {
                    &schur + DMatrix::identity(m, m) * ridge
                };
                if let Some(c) = trial.cholesky() {
                    break c;
                }
                ridge = if ridge == 0.0 {
                    1e-12 * (1.0 + schur.trace().abs())
                } else {
                    ridge * 100.0
                };
                if ridge > 1e-3 * (1.0 + schur.trace().abs()) {
                    return Ok(SdpSolution {
                        status: SdpStatus::NumericalFailure,
                        x: w.x,
                        y: w.y,
                        s: w.s,
                        primal_objective: pobj,
                        dual_objective: dobj,
                        iterations: iter,
                        certificate: None,
                        diagnostics: format!(
                            "Schur complement not positive definite at iteration {iter}"
                        ),
                    });
                }
            }
        };

        // direction for a given sigma and optional corrector term
        let solve_direction = |sigma_mu: f64,
                               corr: Option<(&[DMatrix<f64>], &[DMatrix<f64>])>|
         -> (Vec<f64>, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
            // dX = sigma*mu*S^-1 - X - X*(Rd - sum dy A)*S^-1 [- dXa dSa S^-1]
            // base W = sigma*mu*S^-1 - X - X Rd S^-1 - corr
            let mut wmat: Vec<DMatrix<f64>> = Vec::with_capacity(problem.n_blocks());
            for b in 0..problem.n_blocks() {
                let mut t = &s_inv[b] * sigma_mu;
                t -= &w.x[b];
                t -= &w.x[b] * &rd[b] * &s_inv[b];
                if let Some((dxa, dsa)) = corr {
                    t -= &dxa[b] * &dsa[b] * &s_inv[b];
                }
                wmat.push(t);
            }
            let mut rhs_vec = DMatrix::<f64>::zeros(m, 1);
            for j in 0..m {
                let mut tr_ajw = 0.0;
                for b in 0..problem.n_blocks() {
                    tr_ajw += problem.constraints[j].dot_block(b, &wmat[b]);
                }
                rhs_vec[(j, 0)] = rp[j] - tr_ajw;
            }
            let dy_mat = schur_chol.solve(&rhs_vec);
            let dy: Vec<f64> = (0..m).map(|j| dy_mat[(j, 0)]).collect();
            // dS = Rd - sum dy A
            let mut ds = rd.clone();
            for j in 0..m {
                problem.constraints[j].add_into(&mut ds, -dy[j]);
            }
            // dX = W + X * (sum dy A) * S^-1, symmetrized
            let mut dx = wmat;
            let mut dy_a = problem.zeros();
            for j in 0..m {
                problem.constraints[j].add_into(&mut dy_a, dy[j]);
            }
            for b in 0..problem.n_blocks() {
                dx[b] += &w.x[b] * &dy_a[b] * &s_inv[b];
                dx[b] = (&dx[b] + dx[b].transpose()) * 0.5;
            }
            (dy, dx, ds)
        };

        // predictor (affine) step
        let (_dy_a, dx_a, ds_a) = solve_direction(0.0, None);
        let ap_a = max_step(&w.x, &dx_a);
        let ad_a = max_step(&w.s, &ds_a);
        let mut x_trial = w.x.clone();
        let mut s_trial = w.s.clone();
        for b in 0..problem.n_blocks() {
            x_trial[b] += &dx_a[b] * ap_a;
            s_trial[b] += &ds_a[b] * ad_a;
        }
        let mu_aff = block_dot(&x_trial, &s_trial) / n_total as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(1e-8, 1.0);

        // corrector step
        let (dy, dx, ds) = solve_direction(sigma * mu, Some((&dx_a, &ds_a)));
        let ap = shrink_to_cone(&w.x, &dx, (0.98 * max_step(&w.x, &dx)).min(1.0));
        let ad = shrink_to_cone(&w.s, &ds, (0.98 * max_step(&w.s, &ds)).min(1.0));
        if ap < 1e-12 && ad < 1e-12 {
            let _ = writeln!(diagnostics, "stalled at iteration {iter}: mu {mu:.3e}");
            return Ok(SdpSolution {
                status: SdpStatus::NumericalFailure,
                x: w.x,
                y: w.y,
                s: w.s,
                primal_objective: pobj,
                dual_objective: dobj,
                iterations: iter,
                certificate: None,
                diagnostics,
            });
        }
        for b in 0..problem.n_blocks() {
            w.x[b] += &dx[b] * ap;
            w.s[b] += &ds[b] * ad;
        }
        for j in 0..m {
            w.y[j] += ad * dy[j];
        }
    }

    let pobj = block_dot(&problem.objective, &w.x);
    let dobj: f64 = problem.rhs.iter().zip(&w.y).map(|(b, y)| b * y).sum();
    let _ = writeln!(diagnostics, "iteration cap reached");
    Ok(SdpSolution {
        status: SdpStatus::NumericalFailure,
        x: w.x,
        y: w.y,
        s: w.s,
        primal_objective: pobj,
        dual_objective: dobj,
        iterations: options.max_iterations,
        certificate: None,
        diagnostics,
    })
}

/// Plain-text problem dump: a header line, block descriptors, the rhs
/// vector, then the objective and every constraint as dense row-major
/// blocks. Inverse of [`parse_problem`].
pub fn dump_problem(p: &SdpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sdp-problem v1");
    let _ = writeln!(out, "blocks {}", p.blocks.len());
    for &(d, kind) in &p.blocks {
        let k = match kind {
            BlockKind::Symmetric => "sym",
            BlockKind::HermitianEmbedded => "herm",
        };
        let _ = writeln!(out, "{d} {k}");
    }
    let _ = writeln!(out, "constraints {}", p.constraints.len());
    let _ = writeln!(
        out,
        "rhs {}",
        p.rhs.iter()
            .map(|v| format!("{v:.17e}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    let dump_mats = |out: &mut String, mats: &[DMatrix<f64>]| {
        for mtx in mats {
            for r in 0..mtx.nrows() {
                let row: Vec<String> = (0..mtx.ncols())
                    .map(|c| format!("{:.17e}", mtx[(r, c)]))
                    .collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
    };
    let _ = writeln!(out, "objective");
    dump_mats(&mut out, &p.objective);
    for (j, c) in p.constraints.iter().enumerate() {
        let _ = writeln!(out, "constraint {j}");
        let mut dense: Vec<DMatrix<f64>> = p
            .blocks
            .iter()
            .map(|&(d, _)| DMatrix::zeros(d, d))
            .collect();
        for (b, list) in c.entries.iter().enumerate() {
            for &(i, jj, v) in list {
                dense[b][(i, jj)] = v;
            }
        }
        dump_mats(&mut out, &dense);
    }
    out
}

pub fn parse_problem(text: &str) -> Result<SdpProblem> {
    struct Reader<'a> {
        toks: Vec<&'a str>,
        pos: usize,
    }
    impl<'a> Reader<'a> {
        fn word(&mut self) -> Result<&'a str> {
            let w = self
                .toks
                .get(self.pos)
                .ok_or_else(|| Error::Usage("truncated problem dump".into()))?;
            self.pos += 1;
            Ok(w)
        }
        fn expect(&mut self, kw: &str) -> Result<()> {
            let w = self.word()?;
            if w != kw {
                return Err(Error::Usage(format!(
                    "malformed problem dump: expected '{kw}', found '{w}'"
                )));
            }
            Ok(())
        }
        fn number(&mut self) -> Result<f64> {
            let w = self.word()?;
            w.parse::<f64>()
                .map_err(|_| Error::Usage(format!("expected a number, found '{w}'")))
        }
        fn count(&mut self) -> Result<usize> {
            let w = self.word()?;
            w.parse::<usize>()
                .map_err(|_| Error::Usage(format!("expected a count, found '{w}'")))
        }
        fn mats(&mut self, blocks: &[(usize, BlockKind)]) -> Result<Vec<DMatrix<f64>>> {
            blocks
                .iter()
                .map(|&(d, _)| {
                    let mut mtx = DMatrix::zeros(d, d);
                    for r in 0..d {
                        for c in 0..d {
                            mtx[(r, c)] = self.number()?;
                        }
                    }
                    Ok(mtx)
                })
                .collect()
        }
    }

    let mut rd = Reader {
        toks: text.split_whitespace().collect(),
        pos: 0,
    };
    rd.expect("sdp-problem")?;
    rd.expect("v1")?;
    rd.expect("blocks")?;
    let nb = rd.count()?;
    let mut blocks = Vec::with_capacity(nb);
    for _ in 0..nb {
        let d = rd.count()?;
        let kind = match rd.word()? {
            "sym" => BlockKind::Symmetric,
            "herm" => BlockKind::HermitianEmbedded,
            other => {
                return Err(Error::Usage(format!("unknown block kind '{other}'")));
            }
        };
        blocks.push((d, kind));
    }
    rd.expect("constraints")?;
    let mc = rd.count()?;
    rd.expect("rhs")?;
    let mut rhs = Vec::with_capacity(mc);
    for _ in 0..mc {
        rhs.push(rd.number()?);
    }
    rd.expect("objective")?;
    let objective = rd.mats(&blocks)?;
    let mut problem = SdpProblem {
        blocks: blocks.clone(),
        objective,
        constraints: Vec::new(),
        rhs: Vec::new(),
    };
    for j in 0..mc {
        rd.expect("constraint")?;
        let _idx = rd.word()?;
        let mats = rd.mats(&blocks)?;
        let mut c = Constraint::new(blocks.len());
        for (b, mtx) in mats.iter().enumerate() {
            for r in 0..mtx.nrows() {
                for col in r..mtx.ncols() {
                    if mtx[(r, col)] != 0.0 {
                        c.set(b, r, col, mtx[(r, col)]);
                    }
                }
            }
        }
        problem.add_constraint(c, rhs[j]);
    }
    problem.validate()?;
    Ok(problem)
}
