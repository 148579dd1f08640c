//! End-to-end acceptance battery: one numbered check per headline result,
//! each printed as a single PASS/FAIL line with its runtime. The process
//! exits nonzero if any check fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use cvgme::bridge::{
    gaussian_fock_element_closed, gaussian_fock_element_oracle, qubit_projection,
};
use cvgme::entanglement_sdp::{
    cm_bisep_feasibility, fully_decomposable_witness, optimal_cm_witness, pair_activation_scan,
    pair_bipartitions, pair_compound_cm,
};
use cvgme::fock::{fs_state_density, moments_from_density, partial_transpose};
use cvgme::fs_analytics::{gabriel_two_copy_fs, pt_minus_eigenvector};
use cvgme::sdp::{solve, BlockKind, Constraint, SdpOptions, SdpProblem, SdpStatus};
use cvgme::symplectic::{
    direct_sum, fs_mixture_cm, fs_mixture_components, fs_mixture_nu_tilde_minus,
    fs_separability_threshold, multi_copy_gap, partial_transpose_cm, ppt_min_symplectic_eigenvalue,
    symplectic_eigenvalues, ModeBipartition,
};
use cvgme::threshold::find_threshold;
use cvgme::witnesses::{
    biseparability_witness, gabriel_criterion, ppt_min_eig, random_biseparable, symmetric_witness,
    witness_elements,
};

const R1: f64 = 1.242747;
const R0_PRIME: f64 = 0.284839;
const R0: f64 = 0.575584;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn one_vs_rest(n: usize, m: usize) -> ModeBipartition {
    ModeBipartition::new(n, &[m]).unwrap()
}

// 1. Bisecting the smallest PT symplectic eigenvalue of the symmetric
// three-mode mixture against 1 recovers the full-inseparability edge.
fn c01_full_inseparability_threshold() {
    let crit = |r: f64| {
        let cm = fs_mixture_cm(r)?;
        Ok(ppt_min_symplectic_eigenvalue(&cm, &one_vs_rest(3, 0))?.nu_min - 1.0)
    };
    let res = find_threshold("r1", crit, 1.0, 1.5, 1e-7).unwrap();
    assert!(
        (res.root - R1).abs() < 1e-4,
        "bisected root {} vs {}",
        res.root,
        R1
    );
    assert!((res.root - fs_separability_threshold()).abs() < 1e-6);
}

// 2. Numeric symplectic spectrum matches the closed-form expression for the
// smallest PT symplectic eigenvalue over the whole squeezing range.
fn c02_nu_tilde_closed_form() {
    let mut max_dev = 0.0f64;
    for r in linspace(0.0, 2.0, 200) {
        let pt = partial_transpose_cm(&fs_mixture_cm(r).unwrap(), &[0]).unwrap();
        let numeric = symplectic_eigenvalues(&pt).unwrap()[0];
        max_dev = max_dev.max((numeric - fs_mixture_nu_tilde_minus(r)).abs());
    }
    assert!(max_dev < 1e-9, "max deviation {max_dev:.3e}");
}

// 3. The symmetric matrix-element witness fires exactly below its threshold.
fn c03_symmetric_witness_threshold() {
    let crit = |r: f64| {
        let v = symmetric_witness(r)?;
        Ok(v.lhs - v.rhs)
    };
    let res = find_threshold("r0_prime", crit, 0.05, 0.5, 1e-8).unwrap();
    assert!(
        (res.root - R0_PRIME).abs() < 1e-3,
        "bisected root {} vs {}",
        res.root,
        R0_PRIME
    );
    for r in linspace(0.005, 1.0, 120) {
        let v = symmetric_witness(r).unwrap();
        if r < res.root - 1e-4 {
            assert!(v.violated, "expected violation at r={r}");
        } else if r > res.root + 1e-4 {
            assert!(!v.violated, "unexpected violation at r={r}");
        }
    }
}

// 4. The fully decomposable three-qubit witness optimum changes sign exactly
// at the GME detection edge of the locally projected state.
fn c04_sdp_gme_threshold() {
    let optimum = |r: f64| -> f64 {
        let rho = qubit_projection(r).unwrap();
        fully_decomposable_witness(&rho).unwrap().1
    };
    for r in [0.1, 0.3, 0.5] {
        assert!(optimum(r) < -1e-6, "no detection at r={r}");
    }
    for r in [0.65, 0.9, 1.2] {
        assert!(optimum(r) > -1e-7, "spurious detection at r={r}");
    }
    let res = find_threshold("r0", |r| Ok(optimum(r)), 0.3, 0.9, 2e-4).unwrap();
    assert!(
        (res.root - R0).abs() < 2e-3,
        "bisected root {} vs {}",
        res.root,
        R0
    );
}

// 5. Single-qubit PPT of the projected state is negative exactly below the
// full-inseparability threshold of the Gaussian parent.
fn c05_qubit_ppt_window() {
    let bip = one_vs_rest(3, 0);
    for i in 1..=100usize {
        let r = 2.0 * i as f64 / 100.0;
        let rho = qubit_projection(r).unwrap();
        let min_eig = ppt_min_eig(&rho, &bip).unwrap();
        if r <= R1 - 1e-3 {
            assert!(min_eig < 0.0, "PT not negative at r={r} ({min_eig:.3e})");
        } else if r >= R1 + 1e-3 {
            assert!(min_eig >= -1e-9, "PT negative at r={r} ({min_eig:.3e})");
        }
    }
}

// 6. Two-copy product-vector criterion: closed forms, the generic evaluator,
// and a cutoff-8 truncated oracle all agree, and every lambda is detected.
fn c06_two_copy_activation() {
    for i in 1..=99usize {
        let lambda = i as f64 / 100.0;
        let g = gabriel_two_copy_fs(0, lambda).unwrap();
        let l2 = lambda * lambda;
        let closed = (1.0 - l2) * (1.0 - l2) * l2 / 9.0;
        assert!((g.lhs - closed).abs() < 1e-12);
        assert_eq!(g.rhs, 0.0);
        assert!(g.violated, "no violation at lambda={lambda}");
    }
    // independent cross-derivation against a cutoff-8 truncated state
    for lambda in [0.25, 0.5, 0.75] {
        let single = fs_state_density(0, lambda, 8).unwrap();
        let oracle = |bra: &[usize], ket: &[usize]| {
            // party tuples flatten as (A1,A2,B1,B2,C1,C2); the state is laid
            // out per copy as (A1,B1,C1,A2,B2,C2)
            let remap = |t: &[usize]| [t[0], t[2], t[4], t[1], t[3], t[5]];
            let b = remap(bra);
            let k = remap(ket);
            single.element(&b[..3], &k[..3]).unwrap() * single.element(&b[3..], &k[3..]).unwrap()
        };
        let phi1 = vec![vec![0, 0], vec![0, 0], vec![0, 0]];
        let phi2 = vec![vec![0, 1], vec![1, 0], vec![1, 1]];
        let cuts: Vec<ModeBipartition> = (0..3).map(|i| one_vs_rest(3, i)).collect();
        let (lhs, rhs) = gabriel_criterion(oracle, &phi1, &phi2, &cuts).unwrap();
        let l2 = lambda * lambda;
        let closed = (1.0 - l2) * (1.0 - l2) * l2 / 9.0;
        assert!((lhs - closed).abs() < 1e-10, "lhs {lhs} vs {closed}");
        assert!(rhs.abs() < 1e-10, "rhs {rhs}");
    }
}

// 7. The numeric partial transpose at cutoff 10 reproduces the closed-form
// negative block eigenvalues and eigenvectors.
fn c07_pt_block_spectra() {
    for lambda in [0.3, 0.5, 0.7] {
        let rho = fs_state_density(0, lambda, 10).unwrap();
        let pt = partial_transpose(&rho, &[0]).unwrap();
        let max_im = pt.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
        assert!(max_im < 1e-14);
        let pt_re = pt.map(|z| z.re);
        let dim = pt_re.nrows();
        for m in 1..=3usize {
            let mu = -(2.0f64.sqrt() / 3.0) * (1.0 - lambda * lambda) * lambda.powi(m as i32);
            let v = pt_minus_eigenvector(m, 10).unwrap();
            assert!(v.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max) < 1e-14);
            let mut v = v.map(|z| z.re);
            v /= v.norm();
            let av = &pt_re * &v;
            let mu_num = v.dot(&av);
            assert!(
                (mu_num - mu).abs() < 1e-9,
                "lambda={lambda} m={m}: {mu_num} vs {mu}"
            );
            assert!((&av - &v * mu).norm() < 1e-9);
            // numeric eigenvector by shifted inverse iteration from a
            // generic start, then overlap against the closed form
            let shifted = &pt_re - DMatrix::identity(dim, dim) * (mu + 1e-6 * mu.abs());
            let lu = shifted.lu();
            let mut w = DVector::from_element(dim, 1.0).normalize();
            for _ in 0..4 {
                w = lu.solve(&w).expect("singular shift").normalize();
            }
            let overlap = v.dot(&w).abs();
            assert!(overlap > 1.0 - 1e-9, "overlap {overlap} at m={m}");
        }
    }
}

// 8. All 64 single-excitation-subspace density matrix elements: closed form
// versus the Wick-moment oracle on the covariance matrix.
fn c08_matrix_element_cross_validation() {
    for r in [0.1, 0.3, 0.6, 1.0] {
        let cm = fs_mixture_cm(r).unwrap();
        let mut max_dev = 0.0f64;
        for code in 0..64usize {
            let digit = |k: usize| (code >> k) & 1;
            let bra = [digit(5), digit(4), digit(3)];
            let ket = [digit(2), digit(1), digit(0)];
            let closed = gaussian_fock_element_closed(r, bra, ket).unwrap();
            let oracle = gaussian_fock_element_oracle(&cm, &bra, &ket).unwrap();
            max_dev = max_dev.max((closed - oracle).abs());
        }
        assert!(max_dev < 1e-6, "max deviation {max_dev:.3e} at r={r}");
    }
}

// 9. The non-Gaussian symmetric state at n=0 has exactly the covariance
// matrix of its Gaussian counterpart.
fn c09_same_moments() {
    let r: f64 = 0.5;
    let rho = fs_state_density(0, r.tanh(), 25).unwrap();
    let moments = moments_from_density(&rho).unwrap();
    assert!(moments.mean.amax() < 1e-8);
    let dev = (moments.cm.entries() - fs_mixture_cm(r).unwrap().entries()).amax();
    assert!(dev < 1e-5, "CM deviation {dev:.3e}");
}

// 10. Stacked copies of the biseparable mixture stay feasible for the CM
// criterion, and the decomposition gap is copy-count invariant.
fn c10_multi_copy_blindness() {
    for r in [0.3, 0.8] {
        let single = fs_mixture_cm(r).unwrap();
        let components: Vec<_> = fs_mixture_components(r)
            .unwrap()
            .into_iter()
            .map(|g| (1.0 / 3.0, g))
            .collect();
        let gap1 = multi_copy_gap(&single, &components, 1).unwrap();
        for k in [2usize, 3] {
            let stacked = direct_sum(&vec![single.clone(); k]).unwrap();
            let bips: Vec<ModeBipartition> = (0..3)
                .map(|p| {
                    let group: Vec<usize> = (0..k).map(|c| 3 * c + p).collect();
                    ModeBipartition::new(3 * k, &group).unwrap()
                })
                .collect();
            let outcome = cm_bisep_feasibility(&stacked, &bips).unwrap();
            assert!(outcome.is_feasible(), "k={k} r={r} flagged infeasible");
            let gap_k = multi_copy_gap(&single, &components, k).unwrap();
            assert!((gap_k - gap1).abs() < 1e-12, "gap drift {}", gap_k - gap1);
        }
    }
}

// 11. The compound two-state-per-party configuration is detected at
// (0.5, 0.5), and detection covers the majority of the parameter plane.
fn c11_pair_activation() {
    let gamma = pair_compound_cm(0.5, 0.5).unwrap();
    let witness = optimal_cm_witness(&gamma, &pair_bipartitions()).unwrap();
    assert!(witness.value < -1e-4, "value {}", witness.value);
    witness.validate(&pair_bipartitions()).unwrap();

    let r1_grid = linspace(0.05, 1.23, 20);
    let r2_grid = linspace(0.05, 1.95, 20);
    let points = pair_activation_scan(&r1_grid, &r2_grid, 1);
    assert_eq!(points.len(), 400);
    let solved = points.iter().filter(|p| p.value.is_some()).count();
    let negative = points
        .iter()
        .filter(|p| p.value.map(|v| v < 0.0).unwrap_or(false))
        .count();
    assert_eq!(solved, 400, "{} scan points failed", 400 - solved);
    assert!(negative > 200, "only {negative}/400 negative");
}

// 12. Property battery: solver weak duality on random instances, witness
// non-violation on 1000 sampled biseparable states, CM validity sweeps.
fn c12_property_battery() {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    // random eigenvalue SDPs: min <C,X> with Tr X = 1 equals lambda_min(C)
    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..8 {
        let raw = DMatrix::from_fn(4, 4, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let c = (&raw + raw.transpose()) * 0.5;
        let mut problem = SdpProblem::new(vec![(4, BlockKind::Symmetric)]);
        for i in 0..4 {
            for j in i..4 {
                problem.set_objective(0, i, j, c[(i, j)]);
            }
        }
        let mut tr = Constraint::new(1);
        for i in 0..4 {
            tr.set(0, i, i, 1.0);
        }
        problem.add_constraint(tr, 1.0);
        let sol = solve(&problem, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.dual_objective <= sol.primal_objective + 1e-6);
        let lmin = c
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!((sol.primal_objective - lmin).abs() < 1e-5);
    }

    // sampled biseparable tripartite states never violate the witness
    let bips: Vec<ModeBipartition> = (0..3).map(|m| one_vs_rest(3, m)).collect();
    for seed in 0..1000u64 {
        let bip = &bips[(seed % 3) as usize];
        let rho = random_biseparable(&[2, 2, 2], bip, 1 + (seed % 4) as usize, seed).unwrap();
        let verdict = biseparability_witness(&witness_elements(&rho).unwrap()).unwrap();
        assert!(!verdict.violated, "violation on biseparable sample {seed}");
        assert!(ppt_min_eig(&rho, bip).unwrap() > -1e-9);
    }

    // covariance matrices of the constructor family stay physical
    for r in linspace(0.0, 2.0, 60) {
        let cm = fs_mixture_cm(r).unwrap();
        cm.validate_physical().unwrap();
        let nus = symplectic_eigenvalues(&cm).unwrap();
        assert!(nus.iter().all(|&nu| nu >= 1.0 - 1e-9));
    }
}

fn main() {
    std::panic::set_hook(Box::new(|_| {})); // one line per criterion, no backtraces
    let checks: Vec<(&str, f64, fn())> = vec![
        (
            "01 full-inseparability threshold r1 = 1.242747 +/- 1e-4",
            1.0,
            c01_full_inseparability_threshold,
        ),
        (
            "02 closed-form vs numeric smallest PT symplectic eigenvalue < 1e-9 over 200 points",
            1.0,
            c02_nu_tilde_closed_form,
        ),
        (
            "03 symmetric witness violated exactly on 0 < r < 0.284839 +/- 1e-3",
            1.0,
            c03_symmetric_witness_threshold,
        ),
        (
            "04 SDP witness optimum negative exactly on 0 < r < 0.575584 +/- 2e-3",
            120.0,
            c04_sdp_gme_threshold,
        ),
        (
            "05 qubit PPT minimum eigenvalue window matches the Gaussian threshold",
            5.0,
            c05_qubit_ppt_window,
        ),
        (
            "06 two-copy activation lhs = (1/9)(1-l^2)^2 l^2, rhs = 0, violated on 99 points",
            30.0,
            c06_two_copy_activation,
        ),
        (
            "07 PT block eigenvalues -(sqrt2/3)(1-l^2) l^m and eigenvectors at cutoff 10",
            10.0,
            c07_pt_block_spectra,
        ),
        (
            "08 64 matrix elements closed form vs Wick oracle < 1e-6 at four squeezings",
            10.0,
            c08_matrix_element_cross_validation,
        ),
        (
            "09 Fock-state moments reproduce the Gaussian covariance matrix to 1e-5",
            30.0,
            c09_same_moments,
        ),
        (
            "10 k-copy CM biseparability stays feasible, gap invariant in k to 1e-12",
            60.0,
            c10_multi_copy_blindness,
        ),
        (
            "11 pair activation witness negative at (0.5,0.5) and on most of the 20x20 scan",
            600.0,
            c11_pair_activation,
        ),
        (
            "12 property battery: SDP duality, 1000 biseparable samples, CM sweeps",
            300.0,
            c12_property_battery,
        ),
    ];

    let mut failures = 0usize;
    for (label, limit, f) in checks {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) if secs <= limit => println!("PASS [{secs:7.2}s] {label}"),
            Ok(()) => {
                failures += 1;
                println!("FAIL [{secs:7.2}s] {label}: exceeded {limit} s budget");
            }
            Err(payload) => {
                failures += 1;
                let msg = payload
                    .downcast_ref::<String>()
                    .map(String::as_str)
                    .or_else(|| payload.downcast_ref::<&str>().copied())
                    .unwrap_or("panic");
                println!("FAIL [{secs:7.2}s] {label}: {msg}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance check(s) failed");
        std::process::exit(1);
    }
    println!("all 12 acceptance checks passed");
}
