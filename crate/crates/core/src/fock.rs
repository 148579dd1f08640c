//! Truncated multi-mode Fock-space tensor algebra.
//!
//! Index layout is mode-major: the flat index of the tuple (n_1, ..., n_N) is
//! sum n_i * prod_{j>i} dims_j, i.e. the first mode varies slowest. All
//! partial-trace and partial-transpose routines derive from this convention.

use nalgebra::{Complex, DMatrix, DVector, Dyn, VecStorage};

use crate::error::{Error, Result};
use crate::symplectic::CovarianceMatrix;

pub type C64 = Complex<f64>;

const HERMITICITY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
/// Full (eigenvalue-based) validation is skipped above this dimension.
const VALIDATE_DIM_CAP: usize = 2048;

/// Allocates a zero-filled vector through `alloc_zeroed` so that untouched
/// pages stay unmapped. Large truncated states are mostly structural zeros,
/// which keeps their resident size proportional to the nonzero count.
fn zeroed_complex_vec(len: usize) -> Vec<C64> {
    use std::alloc::{alloc_zeroed, handle_alloc_error, Layout};
    if len == 0 {
        return Vec::new();
    }
    let layout = Layout::array::<C64>(len).expect("allocation size overflow");
    let ptr = unsafe { alloc_zeroed(layout) } as *mut C64;
    if ptr.is_null() {
        handle_alloc_error(layout);
    }
    unsafe { Vec::from_raw_parts(ptr, len, len) }
}

pub(crate) fn zeroed_matrix(nrows: usize, ncols: usize) -> DMatrix<C64> {
    DMatrix::from_data(VecStorage::new(
        Dyn(nrows),
        Dyn(ncols),
        zeroed_complex_vec(nrows * ncols),
    ))
}

/// Complex Hermitian, trace-(almost-)one operator on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockDensityMatrix {
    mode_dims: Vec<usize>,
    entries: DMatrix<C64>,
    /// Probability weight lost to the Fock-space truncation.
    trace_deficit: f64,
}

impl FockDensityMatrix {
    /// Builds a state from explicit entries, validating Hermiticity, trace
    /// and (for moderate dimensions) positive semidefiniteness.
    pub fn new(mode_dims: Vec<usize>, entries: DMatrix<C64>, trace_deficit: f64) -> Result<Self> {
        let dim: usize = mode_dims.iter().product();
        if mode_dims.is_empty() || mode_dims.iter().any(|&d| d == 0) {
            return Err(Error::Usage("mode dimensions must be positive".into()));
        }
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::Usage(format!(
                "entry matrix is {}x{}, expected {dim}x{dim}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let rho = Self { mode_dims, entries, trace_deficit };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_parts_unchecked(
        mode_dims: Vec<usize>,
        entries: DMatrix<C64>,
        trace_deficit: f64,
    ) -> Self {
        Self { mode_dims, entries, trace_deficit }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if dim <= VALIDATE_DIM_CAP {
            let mut max_dev = 0.0f64;
            for i in 0..dim {
                for j in i..dim {
                    max_dev = max_dev.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
                }
            }
            if max_dev > HERMITICITY_TOL {
                return Err(Error::InvalidDensity(format!(
                    "hermiticity deviation {max_dev:.3e}"
                )));
            }
            let min = min_eigenvalue_unchecked(&self.entries);
            if min < -PSD_TOL {
                return Err(Error::InvalidDensity(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        let tr = self.trace();
        if tr.im.abs() > 1e-9 || tr.re > 1.0 + 1e-9 || tr.re < 1.0 - self.trace_deficit - 1e-9 {
            return Err(Error::InvalidDensity(format!(
                "trace {tr} incompatible with deficit {}",
                self.trace_deficit
            )));
        }
        Ok(())
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn n_modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn dim(&self) -> usize {
        self.mode_dims.iter().product()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    /// Strides of the mode-major flat index.
    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.mode_dims)
    }

    /// Flat index of a Fock tuple.
    pub fn flat_index(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.n_modes() {
            return Err(Error::Usage("Fock tuple length mismatch".into()));
        }
        let mut flat = 0;
        for ((&n, &d), &s) in tuple.iter().zip(&self.mode_dims).zip(&self.strides()) {
            if n >= d {
                return Err(Error::Usage(format!("Fock level {n} >= cutoff {d}")));
            }
            flat += n * s;
        }
        Ok(flat)
    }

    /// Matrix element <bra| rho |ket> for Fock tuples.
    pub fn element(&self, bra: &[usize], ket: &[usize]) -> Result<C64> {
        Ok(self.entries[(self.flat_index(bra)?, self.flat_index(ket)?)])
    }
}

pub(crate) fn strides_of(dims: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut s = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Per-mode lists of retained Fock levels for a local filtering operation.
#[derive(Debug, Clone)]
pub struct LocalFilter {
    levels: Vec<Vec<usize>>,
}

impl LocalFilter {
    pub fn new(levels: Vec<Vec<usize>>) -> Result<Self> {
        for l in &levels {
            if l.is_empty() {
                return Err(Error::Usage("filter retains no levels on some mode".into()));
            }
            if !l.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Usage("filter levels must be strictly increasing".into()));
            }
        }
        Ok(Self { levels })
    }

    /// Retains levels 0..d on every mode (`d` per mode from `dims`).
    pub fn lowest(dims: &[usize]) -> Self {
        Self {
            levels: dims.iter().map(|&d| (0..d).collect()).collect(),
        }
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Domain(format!(
            "lambda must lie in [0, 1), got {lambda}"
        )));
    }
    Ok(())
}

/// Fock number state |n><n| on a single mode.
pub fn number_state_density(n: usize, cutoff: usize) -> Result<FockDensityMatrix> {
    if n >= cutoff {
        return Err(Error::Usage(format!("Fock level {n} >= cutoff {cutoff}")));
    }
    let mut m = zeroed_matrix(cutoff, cutoff);
    m[(n, n)] = C64::new(1.0, 0.0);
    Ok(FockDensityMatrix::from_parts_unchecked(vec![cutoff], m, 0.0))
}

/// Truncated two-mode squeezed vacuum: (1-l^2) sum l^{m+m'} |mm><m'm'|.
pub fn tmsv_density(lambda: f64, cutoff: usize) -> Result<FockDensityMatrix> {
    check_lambda(lambda)?;
    if cutoff < 2 {
        return Err(Error::Usage("cutoff must be >= 2".into()));
    }
    let norm = 1.0 - lambda * lambda;
    let mut m = zeroed_matrix(cutoff * cutoff, cutoff * cutoff);
    let pow: Vec<f64> = (0..cutoff).map(|k| lambda.powi(k as i32)).collect();
    for a in 0..cutoff {
        for b in 0..cutoff {
            m[(a * cutoff + a, b * cutoff + b)] = C64::new(norm * pow[a] * pow[b], 0.0);
        }
    }
    let deficit = lambda.powi(2 * cutoff as i32);
    Ok(FockDensityMatrix::from_parts_unchecked(
        vec![cutoff, cutoff],
        m,
        deficit,
    ))
}

/// Truncated single-mode thermal state: diagonal (1-l^2) l^{2m}.
pub fn thermal_density(lambda: f64, cutoff: usize) -> Result<FockDensityMatrix> {
    check_lambda(lambda)?;
    if cutoff == 0 {
        return Err(Error::Usage("cutoff must be >= 1".into()));
    }
    let norm = 1.0 - lambda * lambda;
    let mut m = zeroed_matrix(cutoff, cutoff);
    for a in 0..cutoff {
        m[(a, a)] = C64::new(norm * lambda.powi(2 * a as i32), 0.0);
    }
    let deficit = lambda.powi(2 * cutoff as i32);
    Ok(FockDensityMatrix::from_parts_unchecked(vec![cutoff], m, deficit))
}

/// Three-mode fully symmetric family: equal-weight mixture of the three
/// placements of a TMSV pair with the number state |n> on the leftover mode.
///
/// Assembled entry-by-entry (the state has only O(cutoff^2) nonzeros), so
/// large cutoffs stay cheap in both time and resident memory.
pub fn fs_state_density(n: usize, lambda: f64, cutoff: usize) -> Result<FockDensityMatrix> {
    check_lambda(lambda)?;
    if n >= cutoff {
        return Err(Error::Usage(format!("Fock level {n} >= cutoff {cutoff}")));
    }
    let dim = cutoff * cutoff * cutoff;
    let mut m = zeroed_matrix(dim, dim);
    let norm = (1.0 - lambda * lambda) / 3.0;
    let pow: Vec<f64> = (0..cutoff).map(|k| lambda.powi(k as i32)).collect();
    let strides = strides_of(&[cutoff, cutoff, cutoff]);
    for (i, j, k) in [(0usize, 1usize, 2usize), (0, 2, 1), (1, 2, 0)] {
        for a in 0..cutoff {
            let row = a * strides[i] + a * strides[j] + n * strides[k];
            for b in 0..cutoff {
                let col = b * strides[i] + b * strides[j] + n * strides[k];
                m[(row, col)] += C64::new(norm * pow[a] * pow[b], 0.0);
            }
        }
    }
    let deficit = lambda.powi(2 * cutoff as i32);
    Ok(FockDensityMatrix::from_parts_unchecked(
        vec![cutoff, cutoff, cutoff],
        m,
        deficit,
    ))
}

/// Kronecker product with concatenated mode lists.
pub fn tensor(a: &FockDensityMatrix, b: &FockDensityMatrix) -> FockDensityMatrix {
    let entries = a.entries().kronecker(b.entries());
    let mut dims = a.mode_dims().to_vec();
    dims.extend_from_slice(b.mode_dims());
    let deficit = 1.0 - (1.0 - a.trace_deficit()) * (1.0 - b.trace_deficit());
    FockDensityMatrix::from_parts_unchecked(dims, entries, deficit)
}

/// Reduced state on the listed modes (ascending order of `keep`).
pub fn partial_trace(rho: &FockDensityMatrix, keep: &[usize]) -> Result<FockDensityMatrix> {
    let n = rho.n_modes();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::Usage("partial trace must keep at least one mode".into()));
    }
    if keep.iter().any(|&m| m >= n) {
        return Err(Error::Usage("keep-mode index out of range".into()));
    }
    let traced: Vec<usize> = (0..n).filter(|m| !keep.contains(m)).collect();
    let strides = rho.strides();
    let keep_dims: Vec<usize> = keep.iter().map(|&m| rho.mode_dims()[m]).collect();
    let keep_offsets = offset_table(&keep, &keep_dims, &strides);
    let traced_dims: Vec<usize> = traced.iter().map(|&m| rho.mode_dims()[m]).collect();
    let traced_offsets = offset_table(&traced, &traced_dims, &strides);

    let dk = keep_offsets.len();
    let mut out = zeroed_matrix(dk, dk);
    for (r, &ro) in keep_offsets.iter().enumerate() {
        for (c, &co) in keep_offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &traced_offsets {
                acc += rho.entries()[(ro + t, co + t)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(FockDensityMatrix::from_parts_unchecked(
        keep_dims,
        out,
        rho.trace_deficit(),
    ))
}

/// All flat offsets generated by the given modes (mode-major order of the
/// listed modes themselves).
fn offset_table(modes: &[usize], dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut offsets = vec![0usize];
    for (&m, &d) in modes.iter().zip(dims) {
        let mut next = Vec::with_capacity(offsets.len() * d);
        for &o in &offsets {
            for v in 0..d {
                next.push(o + v * strides[m]);
            }
        }
        offsets = next;
    }
    offsets
}

/// Restricts each mode to the retained levels of `filter` and renormalizes.
pub fn local_project(rho: &FockDensityMatrix, filter: &LocalFilter) -> Result<FockDensityMatrix> {
    if filter.levels().len() != rho.n_modes() {
        return Err(Error::Usage("filter mode count mismatch".into()));
    }
    for (l, &d) in filter.levels().iter().zip(rho.mode_dims()) {
        if l.iter().any(|&v| v >= d) {
            return Err(Error::Usage("filter level exceeds cutoff".into()));
        }
    }
    let strides = rho.strides();
    // flat offsets of every retained tuple, in the projected state's order
    let mut offsets = vec![0usize];
    for (m, l) in filter.levels().iter().enumerate() {
        let mut next = Vec::with_capacity(offsets.len() * l.len());
        for &o in &offsets {
            for &v in l {
                next.push(o + v * strides[m]);
            }
        }
        offsets = next;
    }
    let dk = offsets.len();
    let mut out = DMatrix::zeros(dk, dk);
    for (r, &ro) in offsets.iter().enumerate() {
        for (c, &co) in offsets.iter().enumerate() {
            out[(r, c)] = rho.entries()[(ro, co)];
        }
    }
    let norm: C64 = (0..dk).map(|i| out[(i, i)]).sum();
    if norm.re <= 1e-14 {
        return Err(Error::DegenerateFilter(norm.re));
    }
    out /= norm;
    Ok(FockDensityMatrix::from_parts_unchecked(
        filter.levels().iter().map(|l| l.len()).collect(),
        out,
        0.0,
    ))
}

/// Partial transposition over the listed modes. Returns the raw Hermitian
/// matrix, which is generally not positive semidefinite.
pub fn partial_transpose(rho: &FockDensityMatrix, modes: &[usize]) -> Result<DMatrix<C64>> {
    partial_transpose_raw(rho.mode_dims(), rho.entries(), modes)
}

pub fn partial_transpose_raw(
    dims: &[usize],
    entries: &DMatrix<C64>,
    modes: &[usize],
) -> Result<DMatrix<C64>> {
    let n = dims.len();
    let mut flip = vec![false; n];
    for &m in modes {
        if m >= n {
            return Err(Error::Usage(format!("mode index {m} out of range")));
        }
        flip[m] = true;
    }
    let strides = strides_of(dims);
    let dim: usize = dims.iter().product();
    let mut out = zeroed_matrix(dim, dim);
    let mut rd = vec![0usize; n];
    for r in 0..dim {
        // decode row digits
        let mut rem = r;
        for i in 0..n {
            rd[i] = rem / strides[i];
            rem %= strides[i];
        }
        for c in 0..dim {
            let mut rem = c;
            let mut rr = 0usize;
            let mut cc = 0usize;
            for i in 0..n {
                let cd = rem / strides[i];
                rem %= strides[i];
                if flip[i] {
                    rr += cd * strides[i];
                    cc += rd[i] * strides[i];
                } else {
                    rr += rd[i] * strides[i];
                    cc += cd * strides[i];
                }
            }
            out[(rr, cc)] = entries[(r, c)];
        }
    }
    Ok(out)
}

fn min_eigenvalue_unchecked(h: &DMatrix<C64>) -> f64 {
    // real symmetric fast path
    let max_im = h.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
    if max_im < 1e-14 {
        let real = h.map(|z| z.re);
        real.symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    } else {
        h.clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &DMatrix<C64>) -> Result<f64> {
    if h.nrows() != h.ncols() {
        return Err(Error::Usage("matrix must be square".into()));
    }
    let dim = h.nrows();
    let mut max_dev = 0.0f64;
    for i in 0..dim {
        for j in i..dim {
            max_dev = max_dev.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    if max_dev > 1e-9 {
        return Err(Error::Usage(format!(
            "matrix is not Hermitian (deviation {max_dev:.3e})"
        )));
    }
    let v = min_eigenvalue_unchecked(h);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical("eigen-solver failure".into()))
    }
}

/// The `count` smallest eigenvalues of a Hermitian matrix with their
/// eigenvectors, ascending.
pub fn smallest_eigenpairs(h: &DMatrix<C64>, count: usize) -> Result<Vec<(f64, DVector<C64>)>> {
    let dim = h.nrows();
    let max_im = h.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
    let (vals, vecs): (Vec<f64>, Vec<DVector<C64>>) = if max_im < 1e-14 {
        let eig = h.map(|z| z.re).symmetric_eigen();
        (
            eig.eigenvalues.iter().copied().collect(),
            (0..dim)
                .map(|i| eig.eigenvectors.column(i).map(|x| C64::new(x, 0.0)))
                .collect(),
        )
    } else {
        let eig = h.clone().symmetric_eigen();
        (
            eig.eigenvalues.iter().copied().collect(),
            (0..dim).map(|i| eig.eigenvectors.column(i).into_owned()).collect(),
        )
    };
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    Ok(order
        .into_iter()
        .take(count)
        .map(|i| (vals[i], vecs[i].clone()))
        .collect())
}

/// Result of [`moments_from_density`].
#[derive(Debug, Clone)]
pub struct Moments {
    pub mean: DVector<f64>,
    pub cm: CovarianceMatrix,
    /// Set when the recorded truncation deficit exceeds 1e-6, in which case
    /// the extracted moments may be off by more than requested.
    pub accuracy_warning: bool,
}

/// First moments and covariance matrix extracted through truncated ladder
/// operators, x = (a + a*)/sqrt2, p = (a - a*)/(i sqrt2).
pub fn moments_from_density(rho: &FockDensityMatrix) -> Result<Moments> {
    let n = rho.n_modes();
    let quad: Vec<[DMatrix<C64>; 2]> = rho
        .mode_dims()
        .iter()
        .map(|&d| {
            let mut x = DMatrix::zeros(d, d);
            let mut p = DMatrix::zeros(d, d);
            for m in 1..d {
                let s = (m as f64).sqrt() / 2.0f64.sqrt();
                x[(m - 1, m)] = C64::new(s, 0.0);
                x[(m, m - 1)] = C64::new(s, 0.0);
                p[(m - 1, m)] = C64::new(0.0, -s);
                p[(m, m - 1)] = C64::new(0.0, s);
            }
            [x, p]
        })
        .collect();

    let op = |i: usize| (i / 2, i % 2); // quadrature index -> (mode, x or p)

    let mut mean = DVector::zeros(2 * n);
    for i in 0..2 * n {
        let (m, q) = op(i);
        let v = expect(rho, &[(m, &quad[m][q])]);
        mean[i] = v.re;
    }
    let mut cm = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..2 * n {
        for j in i..2 * n {
            let (mi, qi) = op(i);
            let (mj, qj) = op(j);
            let sym = if mi == mj {
                let prod = &quad[mi][qi] * &quad[mj][qj] + &quad[mi][qj] * &quad[mj][qi];
                expect(rho, &[(mi, &prod)])
            } else {
                expect(rho, &[(mi, &quad[mi][qi]), (mj, &quad[mj][qj])]) * 2.0
            };
            let val = sym.re - 2.0 * mean[i] * mean[j];
            cm[(i, j)] = val;
            cm[(j, i)] = val;
        }
    }
    Ok(Moments {
        mean,
        cm: CovarianceMatrix::new(cm)?,
        accuracy_warning: rho.trace_deficit() > 1e-6,
    })
}

/// Tr(rho * O) for an operator acting nontrivially on the listed modes only.
/// `ops` must be sorted by mode and mention each mode at most once.
fn expect(rho: &FockDensityMatrix, ops: &[(usize, &DMatrix<C64>)]) -> C64 {
    let strides = rho.strides();
    let dims = rho.mode_dims();
    let n = rho.n_modes();
    let involved: Vec<usize> = ops.iter().map(|(m, _)| *m).collect();
    let uninvolved: Vec<usize> = (0..n).filter(|m| !involved.contains(m)).collect();
    let uninvolved_dims: Vec<usize> = uninvolved.iter().map(|&m| dims[m]).collect();
    let base_offsets = offset_table(&uninvolved, &uninvolved_dims, &strides);

    // row/col digit combinations on the involved modes
    let involved_dims: Vec<usize> = involved.iter().map(|&m| dims[m]).collect();
    let involved_offsets = offset_table(&involved, &involved_dims, &strides);
    let mut acc = C64::new(0.0, 0.0);
    let k = involved.len();
    for (ri, &ro) in involved_offsets.iter().enumerate() {
        for (ci, &co) in involved_offsets.iter().enumerate() {
            // operator entry = product over involved modes of op[(r_digit, c_digit)]
            let mut w = C64::new(1.0, 0.0);
            let mut rrem = ri;
            let mut crem = ci;
            for t in 0..k {
                let block: usize = involved_dims[t + 1..].iter().product();
                let rd = rrem / block;
                let cd = crem / block;
                rrem %= block;
                crem %= block;
                w *= ops[t].1[(rd, cd)];
            }
            if w.norm_sqr() == 0.0 {
                continue;
            }
            let mut tr = C64::new(0.0, 0.0);
            for &b in &base_offsets {
                tr += rho.entries()[(b + co, b + ro)];
            }
            acc += w * tr;
        }
    }
    acc
}
