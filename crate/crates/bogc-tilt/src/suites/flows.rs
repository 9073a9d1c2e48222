//! Time flows of `H`, `K`, `Y` and the tau function against finite
//! differences, plus exact Szego values.

use bogc_core::flows::{
    closure_tilts, flow_check_k, flow_rhs_Y, hankel_flow_check, leibniz_check, szego_exactness, tau_log_derivative,
    telescoping_check, FlowBlock, FlowReport, TimeVector,
};
use bogc_core::tilt::TiltFamily;
use bogc_core::C64;
use rayon::prelude::*;
use serde_json::json;

use super::list_label;
use crate::config::{SuiteConfig, SymbolSpec};
use crate::report::Check;

/// Rectangular block used for the raw resolvent flow.
const RECT: (usize, usize) = (4, 3);

fn flow_check(name: String, r: bogc_core::Result<FlowReport>, tol: f64) -> Check {
    match r {
        Ok(rep) => Check::discrepancy(name, rep.max_abs_error, tol)
            .with("r", json!(rep.r))
            .with("fd_step", json!(rep.fd_step))
            .with("M", json!(rep.m))
            .with("times", json!(rep.times)),
        Err(e) => Check::error(name, e.to_string()),
    }
}

fn tau_check(name: String, r: bogc_core::Result<(C64, C64)>, tol: f64) -> Check {
    match r {
        Ok((analytic, numeric)) => Check::absolute(name, analytic, numeric, tol),
        Err(e) => Check::error(name, e.to_string()),
    }
}

fn padded(times: &[f64], len: usize) -> Vec<f64> {
    let mut t = times.to_vec();
    if t.len() < len {
        t.resize(len, 0.0);
    }
    t
}

fn flow_checks(t: &TimeVector, r: usize, tilts: &TiltFamily, n: usize, size: usize, tol: f64) -> Vec<Check> {
    let label = format!("exp({})/r={r}", list_label(t.times()));
    vec![
        flow_check(format!("{label}/H"), hankel_flow_check(t, r, size), tol),
        flow_check(format!("{label}/K"), flow_check_k(t, r, size), tol),
        match leibniz_check(t, r, size) {
            Ok(e) => Check::discrepancy(format!("{label}/leibniz"), e, tol),
            Err(e) => Check::error(format!("{label}/leibniz"), e.to_string()),
        },
        flow_check(
            format!("{label}/Y/tilted/N={n}"),
            flow_rhs_Y(t, tilts, n, r, size, FlowBlock::Tilted),
            tol,
        ),
        flow_check(
            format!("{label}/Y/block={}x{}", RECT.0, RECT.1),
            flow_rhs_Y(t, tilts, n, r, size, FlowBlock::Rectangular(RECT.0, RECT.1)),
            tol,
        ),
        match telescoping_check(t, r, RECT.0, RECT.1, size) {
            Ok(e) => Check::discrepancy(format!("{label}/telescoping"), e, tol),
            Err(e) => Check::error(format!("{label}/telescoping"), e.to_string()),
        },
        tau_check(format!("{label}/tau/N={n}"), tau_log_derivative(t, tilts, n, r, size), tol),
        tau_check(
            format!("{label}/tau/N=0"),
            tau_log_derivative(t, &TiltFamily::ones(0), 0, r, size),
            tol,
        ),
    ]
}

pub fn run(cfg: &SuiteConfig) -> Vec<Check> {
    let opts = &cfg.flows;
    let tol = cfg.tolerances.flows;
    let configured: Vec<Vec<f64>> = cfg
        .configured_symbols()
        .into_iter()
        .filter_map(|s| match s {
            SymbolSpec::Exponential { times } => Some(times),
            SymbolSpec::Rational { .. } => None,
        })
        .collect();
    let time_list = if configured.is_empty() { opts.times.clone() } else { configured };
    let tilts = match &cfg.tilts {
        Some(spec) => super::tilts_from_spec(spec),
        None => closure_tilts(cfg.seed, opts.n, opts.tilt_degree),
    };
    let tilts = match tilts {
        Ok(t) => t,
        Err(e) => return vec![Check::error("tilts", e.to_string())],
    };
    let n = tilts.n();
    let r_max = opts.r_list.iter().copied().max().unwrap_or(1);

    let mut jobs = Vec::new();
    for times in &time_list {
        for &r in &opts.r_list {
            jobs.push((padded(times, r_max), r));
        }
    }
    let flow: Vec<Vec<Check>> = jobs
        .par_iter()
        .map(|(times, r)| match TimeVector::new(times.clone()) {
            Ok(t) => flow_checks(&t, *r, &tilts, n, opts.m, tol),
            Err(e) => vec![Check::error(format!("exp({})", list_label(times)), e.to_string())],
        })
        .collect();
    let mut out: Vec<Check> = flow.into_iter().flatten().collect();

    let szego: Vec<Check> = time_list
        .par_iter()
        .map(|times| {
            let name = format!("szego/exp({})", list_label(times));
            match TimeVector::new(times.clone()).and_then(|t| szego_exactness(&t, cfg.m())) {
                Ok((det, exact)) => Check::relative(name, C64::new(det, 0.0), C64::new(exact, 0.0), cfg.tol)
                    .with("M", json!(cfg.m())),
                Err(e) => Check::error(name, e.to_string()),
            }
        })
        .collect();
    out.extend(szego);
    out
}
