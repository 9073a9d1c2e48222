//! Soft edge checks: pushthrough of the one-spike kernel, the finite-`L`
//! rank-one form and the Airy-scale limits.

use bogc_core::airy::{
    bbp_pushthrough_check, scaling_report, spiked_column_kernel_exact, spiked_discrete_chain, spiked_scaling_row,
    ScalingRow, SpikedSymbolParams,
};
use rayon::prelude::*;
use serde_json::json;

use crate::config::SuiteConfig;
use crate::report::Check;

fn ratios(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] / w[0]).collect()
}

fn scaling_checks(cfg: &SuiteConfig) -> Vec<Check> {
    let o = &cfg.airy;
    let rows: bogc_core::Result<Vec<ScalingRow>> = o
        .l
        .par_iter()
        .map(|&l| SpikedSymbolParams::new(o.a, o.b, l, o.spike_w, 0.0).and_then(|p| spiked_scaling_row(&p)))
        .collect();
    let rep = match rows {
        Ok(r) => scaling_report(r),
        Err(e) => return vec![Check::error("scaling", e.to_string())],
    };
    let ls: Vec<f64> = rep.rows.iter().map(|r| r.l).collect();
    let coeff: Vec<f64> = rep.rows.iter().map(|r| r.err_coeff).collect();
    let kernel: Vec<f64> = rep.rows.iter().map(|r| r.err_kernel).collect();
    let factor: Vec<f64> = rep.rows.iter().map(|r| r.err_factor).collect();
    let rule = json!("strictly decreasing in L");
    vec![
        Check::property("scaling/err_coeff", json!(coeff), rule.clone(), rep.coeff_decreasing)
            .with("L", json!(ls))
            .with("ratios", json!(ratios(&coeff))),
        Check::property("scaling/err_kernel", json!(kernel), rule, rep.kernel_decreasing)
            .with("L", json!(ls))
            .with("ratios", json!(ratios(&kernel)))
            .with("err_factor", json!(factor)),
    ]
}

pub fn run(cfg: &SuiteConfig) -> Vec<Check> {
    let o = &cfg.airy;
    let grid: Vec<(f64, f64)> = o.w.iter().flat_map(|&w| o.s.iter().map(move |&s| (w, s))).collect();
    let mut out: Vec<Check> = grid
        .par_iter()
        .map(|&(w, s)| {
            let name = format!("pushthrough/w={w}/s={s}");
            match bbp_pushthrough_check(w, s, o.order) {
                Ok((boundary, bbp)) => Check::real_absolute(name, boundary, bbp, cfg.tolerances.pushthrough)
                    .with("order", json!(o.order)),
                Err(e) => Check::error(name, e.to_string()),
            }
        })
        .collect();
    out.extend(scaling_checks(cfg));

    let m = cfg.m();
    let label = format!("spiked/L={}", o.l_exact);
    match SpikedSymbolParams::new(o.a, o.b, o.l_exact, o.spike_w, 0.0) {
        Ok(p) => {
            out.push(match spiked_column_kernel_exact(&p, m) {
                Ok(r) => Check::discrepancy(format!("{label}/rank_one_kernel"), r.max_entry_diff, cfg.tolerances.spiked_kernel)
                    .with("N", json!(r.n))
                    .with("M", json!(r.m))
                    .with("column_structure_err", json!(r.column_structure_err))
                    .with("factor_err", json!(r.factor_err))
                    .with("boundary_value", json!([r.boundary_value.0, r.boundary_value.1]))
                    .with("tilt_tail_bound", json!(r.tilt_tail_bound)),
                Err(e) => Check::error(format!("{label}/rank_one_kernel"), e.to_string()),
            });
            out.push(match spiked_discrete_chain(&p, m) {
                Ok((fredholm, direct)) => {
                    Check::relative(format!("{label}/discrete_chain"), fredholm, direct, cfg.tolerances.discrete_chain)
                }
                Err(e) => Check::error(format!("{label}/discrete_chain"), e.to_string()),
            });
        }
        Err(e) => out.push(Check::error(label, e.to_string())),
    }
    out
}
