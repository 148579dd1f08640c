//! Fock-basis matrix elements of a zero-mean Gaussian state, reconstructed
//! from its covariance matrix.
//!
//! Three routes are provided: the closed forms for the three-mode symmetric
//! state on the {0,1}^3 subspace, an exact Wick/Isserlis moment evaluation
//! of the phase-space overlap
//!     Tr(rho G) = (2pi)^N Int W[rho] W[G],
//! and a Gauss-Hermite tensor-grid quadrature of the same overlap used as an
//! independent numerical check.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{C64, FockDensityMatrix};
use crate::symplectic::CovarianceMatrix;

/// f(r) = 2 / sqrt(5 + 4 cosh 2r).
pub fn shorthand_f(r: f64) -> f64 {
    2.0 / (5.0 + 4.0 * (2.0 * r).cosh()).sqrt()
}

/// g(r) = 9 / (37 + 32 cosh 2r + 3 cosh 4r).
pub fn shorthand_g(r: f64) -> f64 {
    9.0 / (37.0 + 32.0 * (2.0 * r).cosh() + 3.0 * (4.0 * r).cosh())
}

fn qubit_index(t: [usize; 3]) -> Result<usize> {
    if t.iter().any(|&x| x > 1) {
        return Err(Error::Usage("Fock indices must lie in {0, 1}".into()));
    }
    Ok(t[0] * 4 + t[1] * 2 + t[2])
}

/// Closed-form element <bra|rho_G|ket> of the three-mode symmetric Gaussian
/// state in the at-most-one-excitation subspace. Every off-diagonal pattern
/// not covered by the listed symmetry groups is exactly zero.
pub fn gaussian_fock_element_closed(r: f64, bra: [usize; 3], ket: [usize; 3]) -> Result<f64> {
    let b = qubit_index(bra)?;
    let k = qubit_index(ket)?;
    let f = shorthand_f(r);
    let g = shorthand_g(r);
    let c = |n: i32| (n as f64 * r).cosh();
    let sh = r.sinh();
    let sh2 = (2.0 * r).sinh();

    let pop = |idx: usize| -> f64 {
        match idx.count_ones() {
            0 => 12.0 * f * g,
            1 => {
                24.0 * f * g * (67.0 + 68.0 * c(2) + 9.0 * c(4)) * sh * sh
                    / (249.0 + 314.0 * c(2) + 79.0 * c(4) + 6.0 * c(6))
            }
            2 => {
                f.powi(5) * g.powi(3) / 216.0
                    * (20558.0
                        + 38274.0 * c(2)
                        + 24384.0 * c(4)
                        + 8539.0 * c(6)
                        + 1458.0 * c(8)
                        + 99.0 * c(10))
                    * sh
                    * sh
            }
            _ => {
                f.powi(7) * g.powi(4) / 7776.0
                    * (9216316.0
                        + 15789701.0 * c(2)
                        + 9730682.0 * c(4)
                        + 4155731.0 * c(6)
                        + 1182212.0 * c(8)
                        + 213057.0 * c(10)
                        + 22086.0 * c(12)
                        + 999.0 * c(14))
                    * sh.powi(4)
            }
        }
    };

    if b == k {
        return Ok(pop(b));
    }
    let (lo, hi) = (b.min(k), b.max(k));
    let (eb, ek) = (lo.count_ones(), hi.count_ones());
    let v = match (eb, ek) {
        // <000| . |two excitations>
        (0, 2) => f.powi(3) * g * g * (19.0 + 16.0 * c(2) + c(4)) * sh2,
        // <one excitation| . |different one excitation>
        (1, 1) => -f.powi(3) * g * g * 2.0 * (2.0 + c(2)) * sh2 * sh2,
        // <one excitation| . |111>
        (1, 3) => {
            f.powi(5) * g * g / 2.0 * (54.0 * c(1) + 17.0 * c(3) + c(5)) * sh.powi(3)
        }
        // <two excitations| . |different two excitations>
        (2, 2) => {
            f.powi(5) * g * g / 4.0 * (33.0 + 22.0 * c(2) - c(4)) * sh2 * sh2
        }
        _ => 0.0,
    };
    Ok(v)
}

/// Three-qubit state obtained by projecting the three-mode Gaussian state
/// onto the at-most-one-excitation subspace and renormalizing by the sum of
/// the eight diagonal elements.
pub fn qubit_projection(r: f64) -> Result<FockDensityMatrix> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!("squeezing must be finite and >= 0, got {r}")));
    }
    let mut m = DMatrix::<C64>::zeros(8, 8);
    let tuple = |i: usize| [i / 4, (i / 2) % 2, i % 2];
    let mut norm = 0.0;
    for i in 0..8 {
        norm += gaussian_fock_element_closed(r, tuple(i), tuple(i))?;
    }
    for i in 0..8 {
        for j in 0..8 {
            let v = gaussian_fock_element_closed(r, tuple(i), tuple(j))? / norm;
            m[(i, j)] = C64::new(v, 0.0);
        }
    }
    FockDensityMatrix::new(vec![2, 2, 2], m, 0.0)
}

/// Gaussian Wigner function W(v) = exp(-v^T inv(gamma) v) / (pi^N sqrt(det gamma))
/// of a zero-mean state, with the inverse and determinant cached.
#[derive(Debug, Clone)]
pub struct WignerGaussian {
    cm: CovarianceMatrix,
    inv: DMatrix<f64>,
    det: f64,
}

impl WignerGaussian {
    pub fn new(cm: CovarianceMatrix) -> Result<Self> {
        let chol = cm
            .entries()
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidCm("covariance matrix not positive definite".into()))?;
        let inv = chol.inverse();
        let det = chol.determinant();
        let residual = (cm.entries() * &inv - DMatrix::identity(inv.nrows(), inv.ncols())).amax();
        if residual > 1e-10 {
            return Err(Error::Numerical(format!(
                "ill-conditioned covariance matrix: inverse residual {residual:.3e}"
            )));
        }
        Ok(Self { cm, inv, det })
    }

    pub fn cm(&self) -> &CovarianceMatrix {
        &self.cm
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inv
    }

    pub fn determinant(&self) -> f64 {
        self.det
    }

    /// Value of the Wigner function at the phase-space point v (interleaved
    /// x1, p1, ..., xN, pN).
    pub fn evaluate(&self, v: &[f64]) -> f64 {
        let n2 = self.inv.nrows();
        assert_eq!(v.len(), n2);
        let mut q = 0.0;
        for i in 0..n2 {
            for j in 0..n2 {
                q += v[i] * self.inv[(i, j)] * v[j];
            }
        }
        (-q).exp() / (std::f64::consts::PI.powi(n2 as i32 / 2) * self.det.sqrt())
    }
}

/// Sparse multivariate polynomial with complex coefficients; exponents are
/// kept per variable (the 2N phase-space coordinates).
#[derive(Debug, Clone)]
struct Poly {
    nvars: usize,
    terms: HashMap<Vec<u8>, C64>,
}

impl Poly {
    fn constant(nvars: usize, c: C64) -> Self {
        let mut terms = HashMap::new();
        if c != C64::new(0.0, 0.0) {
            terms.insert(vec![0u8; nvars], c);
        }
        Self { nvars, terms }
    }

    fn add_term(&mut self, exps: Vec<u8>, c: C64) {
        let e = self.terms.entry(exps).or_insert(C64::new(0.0, 0.0));
        *e += c;
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly {
            nvars: self.nvars,
            terms: HashMap::new(),
        };
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u8> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca * cb);
            }
        }
        out
    }

    fn eval(&self, v: &[f64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut m = 1.0;
            for (x, &p) in v.iter().zip(e) {
                m *= x.powi(p as i32);
            }
            acc += c * m;
        }
        acc
    }

    fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Polynomial part of the single-mode Fock-dyad Wigner function:
/// pi W[|m><n|](x, p) e^{x^2+p^2} for variables (x, p) at positions
/// (2*mode, 2*mode+1) of an nvars-variable polynomial.
fn dyad_poly(m: usize, n: usize, mode: usize, nvars: usize) -> Poly {
    if m > n {
        // W[|m><n|] = conj(W[|n><m|])
        let p = dyad_poly(n, m, mode, nvars);
        let mut out = Poly {
            nvars,
            terms: HashMap::new(),
        };
        for (e, c) in p.terms {
            out.add_term(e, c.conj());
        }
        return out;
    }
    let (ix, ip) = (2 * mode, 2 * mode + 1);
    let alpha = n - m;
    // (sqrt2 (x - i p))^{n-m}
    let mut lead = Poly::constant(nvars, C64::new(1.0, 0.0));
    let mut base = Poly {
        nvars,
        terms: HashMap::new(),
    };
    {
        let mut ex = vec![0u8; nvars];
        ex[ix] = 1;
        base.add_term(ex, C64::new(2.0f64.sqrt(), 0.0));
        let mut ep = vec![0u8; nvars];
        ep[ip] = 1;
        base.add_term(ep, C64::new(0.0, -(2.0f64.sqrt())));
    }
    for _ in 0..alpha {
        lead = lead.mul(&base);
    }
    // associated Laguerre L_m^alpha(2(x^2+p^2)) expanded in powers of x^2+p^2
    let mut lag = Poly {
        nvars,
        terms: HashMap::new(),
    };
    for s in 0..=m {
        let coeff = if s % 2 == 0 { 1.0 } else { -1.0 } * binomial(n, m - s) * 2.0f64.powi(s as i32)
            / factorial(s);
        // (x^2 + p^2)^s expanded binomially
        for t in 0..=s {
            let mut ex = vec![0u8; nvars];
            ex[ix] = (2 * t) as u8;
            ex[ip] = (2 * (s - t)) as u8;
            lag.add_term(ex, C64::new(coeff * binomial(s, t), 0.0));
        }
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let pref = sign * (factorial(m) / factorial(n)).sqrt();
    lead.mul(&lag).mul(&Poly::constant(nvars, C64::new(pref, 0.0)))
}

/// Joint polynomial P(v) with W[(x)|ket_i><bra_i|](v) = P(v) e^{-|v|^2} / pi^N.
fn dyad_product_poly(bra: &[usize], ket: &[usize]) -> Poly {
    let nvars = 2 * bra.len();
    let mut p = Poly::constant(nvars, C64::new(1.0, 0.0));
    for (mode, (&b, &k)) in bra.iter().zip(ket).enumerate() {
        // G = |ket><bra| per mode, W[|m><n|] with m = ket, n = bra
        p = p.mul(&dyad_poly(k, b, mode, nvars));
    }
    p
}

/// Gaussian moments E[v^alpha] under covariance sigma via the Isserlis/Wick
/// recursion, memoized over sub-multi-indices.
struct MomentTable<'a> {
    sigma: &'a DMatrix<f64>,
    memo: HashMap<Vec<u8>, f64>,
}

impl<'a> MomentTable<'a> {
    fn new(sigma: &'a DMatrix<f64>) -> Self {
        Self {
            sigma,
            memo: HashMap::new(),
        }
    }

    fn moment(&mut self, alpha: &[u8]) -> f64 {
        let total: usize = alpha.iter().map(|&x| x as usize).sum();
        if total == 0 {
            return 1.0;
        }
        if total % 2 == 1 {
            return 0.0;
        }
        if let Some(&v) = self.memo.get(alpha) {
            return v;
        }
        let i = alpha.iter().position(|&x| x > 0).unwrap();
        let mut rest = alpha.to_vec();
        rest[i] -= 1;
        // E[v_i v^rest] = sum_j rest_j sigma_ij E[v^{rest - e_j}]
        let mut acc = 0.0;
        for j in 0..alpha.len() {
            if rest[j] == 0 {
                continue;
            }
            let mult = rest[j] as f64;
            rest[j] -= 1;
            acc += mult * self.sigma[(i, j)] * self.moment(&rest.clone());
            rest[j] += 1;
        }
        self.memo.insert(alpha.to_vec(), acc);
        acc
    }
}

const DEGREE_BOUND: usize = 64;

/// Exact Fock-basis matrix element <bra|rho|ket> of the zero-mean Gaussian
/// state with the given CM, via Wick-moment evaluation of the Wigner
/// overlap.
pub fn gaussian_fock_element_oracle(
    cm: &CovarianceMatrix,
    bra: &[usize],
    ket: &[usize],
) -> Result<f64> {
    let v = gaussian_fock_element_oracle_complex(cm, bra, ket)?;
    if v.im.abs() > 1e-9 * (1.0 + v.re.abs()) {
        return Err(Error::Numerical(format!(
            "element has unexpected imaginary part {:.3e}",
            v.im
        )));
    }
    Ok(v.re)
}

pub fn gaussian_fock_element_oracle_complex(
    cm: &CovarianceMatrix,
    bra: &[usize],
    ket: &[usize],
) -> Result<C64> {
    let n = cm.n_modes();
    if bra.len() != n || ket.len() != n {
        return Err(Error::Usage("Fock tuple length must match mode count".into()));
    }
    let poly = dyad_product_poly(bra, ket);
    if poly.total_degree() > DEGREE_BOUND {
        return Err(Error::Usage(format!(
            "total polynomial degree exceeds bound {DEGREE_BOUND}"
        )));
    }
    let wig = WignerGaussian::new(cm.clone())?;
    // combined quadratic form A = inv(gamma) + I; moments under sigma = inv(A)/2
    let dim = 2 * n;
    let a = wig.inverse() + DMatrix::identity(dim, dim);
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidCm("combined quadratic form not positive definite".into()))?;
    let sigma = chol.inverse() / 2.0;
    let det_ipg = (DMatrix::identity(dim, dim) + cm.entries()).determinant();

    let mut table = MomentTable::new(&sigma);
    let mut acc = C64::new(0.0, 0.0);
    for (e, c) in &poly.terms {
        acc += c * table.moment(e);
    }
    Ok(acc * 2.0f64.powi(n as i32) / det_ipg.sqrt())
}

/// Gauss-Hermite nodes and weights for the weight e^{-t^2}, via the Jacobi
/// (Golub-Welsch) eigenproblem.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let w = std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, i)].powi(2);
            (eig.eigenvalues[i], w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Same overlap as [`gaussian_fock_element_oracle`], evaluated by
/// tensor-grid Gauss-Hermite quadrature with `nodes` points per dimension.
/// Exact for polynomial degree < 2*nodes; retained as an independent
/// numerical route.
pub fn gaussian_fock_element_quadrature(
    cm: &CovarianceMatrix,
    bra: &[usize],
    ket: &[usize],
    nodes: usize,
) -> Result<f64> {
    let n = cm.n_modes();
    if bra.len() != n || ket.len() != n {
        return Err(Error::Usage("Fock tuple length must match mode count".into()));
    }
    let poly = dyad_product_poly(bra, ket);
    let wig = WignerGaussian::new(cm.clone())?;
    let dim = 2 * n;
    let a = wig.inverse() + DMatrix::identity(dim, dim);
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidCm("combined quadratic form not positive definite".into()))?;
    // substitute v = L^{-T} u so the exponent becomes -|u|^2
    let l = chol.l();
    let linv_t = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("Cholesky factor not invertible".into()))?
        .transpose();
    let det_l = (0..dim).map(|i| l[(i, i)]).product::<f64>();

    let (ts, ws) = gauss_hermite(nodes);
    let mut idx = vec![0usize; dim];
    let mut acc = C64::new(0.0, 0.0);
    let mut u = vec![0.0f64; dim];
    let mut v = vec![0.0f64; dim];
    loop {
        let mut w = 1.0;
        for d in 0..dim {
            u[d] = ts[idx[d]];
            w *= ws[idx[d]];
        }
        for d in 0..dim {
            let mut s = 0.0;
            for e in 0..dim {
                s += linv_t[(d, e)] * u[e];
            }
            v[d] = s;
        }
        acc += poly.eval(&v) * w;
        // odometer increment
        let mut d = 0;
        loop {
            if d == dim {
                let pref = 2.0f64.powi(n as i32) / (std::f64::consts::PI.powi(n as i32) * wig.determinant().sqrt());
                let val = acc * pref / det_l;
                if val.im.abs() > 1e-8 * (1.0 + val.re.abs()) {
                    return Err(Error::Numerical(format!(
                        "quadrature element has imaginary part {:.3e}",
                        val.im
                    )));
                }
                return Ok(val.re);
            }
            idx[d] += 1;
            if idx[d] < nodes {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}
