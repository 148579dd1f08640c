//! Implementations of the CLI subcommands; each returns the rendered
//! output text.

use serde_json::json;

use cvgme::bridge::{gaussian_fock_element_closed, gaussian_fock_element_oracle, qubit_projection};
use cvgme::entanglement_sdp::{
    cm_bisep_feasibility_with, fully_decomposable_witness_with, pair_activation_scan,
    CmBisepOutcome,
};
use cvgme::fs_analytics::gabriel_two_copy_fs;
use cvgme::sdp::SdpOptions;
use cvgme::symplectic::{
    direct_sum, fs_mixture_cm, fs_mixture_components, fs_mixture_nu_tilde_minus, multi_copy_gap,
    ModeBipartition,
};
use cvgme::threshold::find_threshold;
use cvgme::witnesses::{ppt_min_eig, symmetric_witness};
use cvgme::{Error, Result};

use crate::config::Config;
use crate::output::{fmt_g, Csv};

fn sdp_options(config: &Config) -> SdpOptions {
    let mut options = SdpOptions::default();
    if let Some(cap) = config.sdp_max_iterations {
        options.max_iterations = cap;
    }
    options
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::Usage("steps must be at least 1".into()));
    }
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::Usage(format!("invalid range [{lo}, {hi}]")));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect())
}

fn json_text(value: serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(&value).expect("JSON rendering");
    text.push('\n');
    text
}

pub fn thresholds(config: &Config) -> Result<String> {
    let tol = config.bisect_tol.unwrap_or(1e-6);
    let options = sdp_options(config);

    let r1 = find_threshold(
        "r1",
        |r| Ok(fs_mixture_nu_tilde_minus(r) - 1.0),
        1.0,
        1.5,
        tol,
    )?;
    let r0_prime = find_threshold(
        "r0_prime",
        |r| {
            let v = symmetric_witness(r)?;
            Ok(v.lhs - v.rhs)
        },
        0.05,
        0.5,
        tol,
    )?;
    let r0 = find_threshold(
        "r0",
        |r| {
            let rho = qubit_projection(r)?;
            Ok(fully_decomposable_witness_with(&rho, &options)?.1)
        },
        0.3,
        0.9,
        tol,
    )?;

    Ok(json_text(json!({
        "r0_prime": r0_prime.root,
        "r0": r0.root,
        "r1": r1.root,
        "r0_prime_iterations": r0_prime.iterations,
        "r0_iterations": r0.iterations,
        "r1_iterations": r1.iterations,
        "tolerance": tol,
    })))
}

pub fn witness_scan(r_min: f64, r_max: f64, steps: usize) -> Result<String> {
    if r_min < 0.0 {
        return Err(Error::Usage("squeezing parameter must be nonnegative".into()));
    }
    let mut csv = Csv::new(&[
        "r",
        "nu_tilde_minus",
        "ppt_violated",
        "witness_lhs",
        "witness_rhs",
        "witness_violated",
    ]);
    for r in linspace(r_min, r_max, steps)? {
        let nu = fs_mixture_nu_tilde_minus(r);
        let verdict = symmetric_witness(r)?;
        csv.row(vec![
            fmt_g(r),
            fmt_g(nu),
            (nu < 1.0 - 1e-12).to_string(),
            fmt_g(verdict.lhs),
            fmt_g(verdict.rhs),
            verdict.violated.to_string(),
        ]);
    }
    Ok(csv.finish())
}

pub fn gabriel(grid_spec: &str, n: usize) -> Result<String> {
    let parts: Vec<&str> = grid_spec.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err(Error::Usage(format!(
            "lambda grid must be start:stop:steps, got '{grid_spec}'"
        )));
    };
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::Usage(format!("invalid grid number '{s}'")))
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("invalid step count '{steps}'")))?;
    if !(lo > 0.0 && hi < 1.0) {
        return Err(Error::Usage("lambda grid must lie inside (0, 1)".into()));
    }

    let mut csv = Csv::new(&["lambda", "lhs", "rhs", "violated"]);
    for lambda in linspace(lo, hi, steps)? {
        let check = gabriel_two_copy_fs(n, lambda)?;
        csv.row(vec![
            fmt_g(lambda),
            fmt_g(check.lhs),
            fmt_g(check.rhs),
            check.violated.to_string(),
        ]);
    }
    Ok(csv.finish())
}

pub fn pair_scan(
    (r1_min, r1_max): (f64, f64),
    (r2_min, r2_max): (f64, f64),
    steps: usize,
    jobs: usize,
) -> Result<String> {
    if r1_min <= 0.0 || r2_min <= 0.0 {
        return Err(Error::Usage(
            "pair-scan ranges must start above 0 (the states degenerate at r = 0)".into(),
        ));
    }
    let r1_grid = linspace(r1_min, r1_max, steps)?;
    let r2_grid = linspace(r2_min, r2_max, steps)?;
    let mut csv = Csv::new(&["r1", "r2", "value", "status"]);
    for rec in pair_activation_scan(&r1_grid, &r2_grid, jobs) {
        csv.row(vec![
            fmt_g(rec.r1),
            fmt_g(rec.r2),
            rec.value.map(fmt_g).unwrap_or_default(),
            rec.status,
        ]);
    }
    Ok(csv.finish())
}

pub fn elements(r: f64) -> Result<String> {
    let gamma = fs_mixture_cm(r)?;
    let mut csv = Csv::new(&["bra", "ket", "closed_form", "oracle"]);
    for b in 0..8u32 {
        for k in 0..8u32 {
            let bra = [(b >> 2 & 1) as usize, (b >> 1 & 1) as usize, (b & 1) as usize];
            let ket = [(k >> 2 & 1) as usize, (k >> 1 & 1) as usize, (k & 1) as usize];
            let closed = gaussian_fock_element_closed(r, bra, ket)?;
            let oracle = gaussian_fock_element_oracle(&gamma, &bra, &ket)?;
            csv.row(vec![
                format!("{}{}{}", bra[0], bra[1], bra[2]),
                format!("{}{}{}", ket[0], ket[1], ket[2]),
                fmt_g(closed),
                fmt_g(oracle),
            ]);
        }
    }
    Ok(csv.finish())
}

pub fn qubit_gme(r: f64) -> Result<String> {
    let rho = qubit_projection(r)?;
    let (_, optimum) = fully_decomposable_witness_with(&rho, &SdpOptions::default())?;
    let mut ppt = Vec::new();
    for q in 0..3 {
        let bip = ModeBipartition::new(3, &[q])?;
        ppt.push(ppt_min_eig(&rho, &bip)?);
    }
    Ok(json_text(json!({
        "r": r,
        "witness_optimum": optimum,
        "gme_detected": optimum < -1e-9,
        "ppt_min_eig_qubit0": ppt[0],
        "ppt_min_eig_qubit1": ppt[1],
        "ppt_min_eig_qubit2": ppt[2],
    })))
}

pub fn multicopy_check(r: f64, copies: usize) -> Result<String> {
    if copies == 0 || copies > 8 {
        return Err(Error::Usage("copies must be between 1 and 8".into()));
    }
    let single = fs_mixture_cm(r)?;
    let stacked = direct_sum(&vec![single.clone(); copies])?;
    let bipartitions: Vec<ModeBipartition> = (0..3)
        .map(|party| {
            let group: Vec<usize> = (0..copies).map(|c| 3 * c + party).collect();
            ModeBipartition::new(3 * copies, &group)
        })
        .collect::<Result<_>>()?;
    let outcome = cm_bisep_feasibility_with(&stacked, &bipartitions, &SdpOptions::default())?;

    let decomposition: Vec<(f64, _)> = fs_mixture_components(r)?
        .into_iter()
        .map(|g| (1.0 / 3.0, g))
        .collect();
    let gap_single = multi_copy_gap(&single, &decomposition, 1)?;
    let gap_k = multi_copy_gap(&single, &decomposition, copies)?;

    let (feasible, margin) = match &outcome {
        CmBisepOutcome::Feasible { margin, .. } => (true, Some(*margin)),
        CmBisepOutcome::Infeasible { .. } => (false, None),
    };
    Ok(json_text(json!({
        "r": r,
        "copies": copies,
        "feasible": feasible,
        "margin": margin,
        "gap_single_copy": gap_single,
        "gap_k_copies": gap_k,
        "gap_difference": gap_k - gap_single,
    })))
}
