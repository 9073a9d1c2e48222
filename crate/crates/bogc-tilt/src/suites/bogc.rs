//! `D_N(phi) = G^N Z det(I - K)` on the tail `[N, M)`.

use bogc_core::operators::{bogc_kernel, fredholm_det, toeplitz_det};
use rayon::prelude::*;
use serde_json::json;

use super::{exp_spec, factorize};
use crate::config::SuiteConfig;
use crate::report::Check;

pub fn run(cfg: &SuiteConfig) -> Vec<Check> {
    let mut symbols = cfg.configured_symbols();
    if symbols.is_empty() {
        symbols.push(exp_spec(&[0.3]));
    }
    let n_list = cfg.sizes.n_list.clone().unwrap_or_else(|| (1..=8).collect());
    let m = cfg.m();
    let mut out = Vec::new();
    for spec in &symbols {
        let label = spec.label();
        let fact = match factorize(cfg, spec) {
            Ok(f) => f,
            Err(e) => {
                out.push(Check::error(label.clone(), e.to_string()));
                continue;
            }
        };
        let k = match bogc_kernel(&fact, m) {
            Ok(k) => k,
            Err(e) => {
                out.push(Check::error(label.clone(), e.to_string()));
                continue;
            }
        };
        let checks: Vec<Check> = n_list
            .par_iter()
            .map(|&n| {
                let name = format!("{label}/N={n}");
                let lhs = match toeplitz_det(&fact.phi, n) {
                    Ok(v) => v,
                    Err(e) => return Check::error(name, e.to_string()),
                };
                let tail = fredholm_det(&k, n);
                let rhs = fact.geometric_mean.powi(n as i32) * fact.szego_z * tail.value;
                Check::relative(name, lhs, rhs, cfg.tol)
                    .with("M", json!(m))
                    .with("doubling_delta", json!(tail.doubling_delta))
                    .with("szego_tail_bound", json!(fact.szego_tail_bound))
            })
            .collect();
        out.extend(checks);
    }
    out
}
