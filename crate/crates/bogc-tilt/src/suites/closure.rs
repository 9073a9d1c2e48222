//! Rank of the span of tilted-minor and resolvent quantities over sampled
//! times, with and without boundary-shifted minors.

use bogc_core::flows::{
    closure_experiment, closure_quantities, closure_ranks, closure_sample_time, closure_setup, ClosureReport, TimeBox,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::SuiteConfig;
use crate::report::Check;

fn experiment(cfg: &SuiteConfig) -> bogc_core::Result<ClosureReport> {
    let o = &cfg.closure;
    let time_box = TimeBox::new(o.t_lo.clone(), o.t_hi.clone())?;
    if time_box.lo == time_box.hi {
        return closure_experiment(cfg.seed, o.n, o.d, o.samples, time_box);
    }
    let setup = closure_setup(cfg.seed, o.n, o.d, o.samples, time_box)?;
    let samples = (0..o.samples)
        .into_par_iter()
        .map(|i| closure_quantities(&setup, &closure_sample_time(cfg.seed, i, &setup.time_box)))
        .collect::<bogc_core::Result<Vec<_>>>()?;
    Ok(closure_ranks(&setup, &samples))
}

pub fn run(cfg: &SuiteConfig) -> Vec<Check> {
    let o = &cfg.closure;
    let rep = match experiment(cfg) {
        Ok(r) => r,
        Err(e) => return vec![Check::error("closure", e.to_string())],
    };
    let expected = json!(o.expected);
    let spectra: Map<String, Value> = rep.spectra.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let common = |c: Check| {
        c.with("threshold", json!(rep.threshold))
            .with("sample_count", json!(rep.sample_count))
            .with("N", json!(o.n))
            .with("d", json!(o.d))
            .with("time_box", json!({"lo": o.t_lo, "hi": o.t_hi}))
    };
    vec![
        common(Check::exact(
            "closure/minors",
            json!([rep.rank_without_shifts, rep.rank_with_shifts]),
            expected.clone(),
        ))
        .with("quantity_list", json!(rep.quantity_list))
        .with("spectra", Value::Object(spectra)),
        common(Check::exact(
            "closure/resolvent",
            json!([rep.resolvent_rank_without_shifts, rep.resolvent_rank_with_shifts]),
            expected,
        )),
    ]
}
