//! Tilted minors against their oblique Fredholm form, with the fixed-tail
//! correction rank bound on every accepted chart.

use bogc_core::operators::KernelContext;
use bogc_core::tilt::{tilted_fredholm_rhs_in, tilted_minor_direct, TiltFamily};
use bogc_core::Error;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{exp_spec, factorize, random_tilts, rational_spec, tilts_from_spec};
use crate::config::SuiteConfig;
use crate::report::Check;

struct Job {
    name: String,
    n: usize,
    tilts: bogc_core::Result<TiltFamily>,
    stream: Option<u64>,
}

enum Outcome {
    Checked(Vec<Check>),
    Skipped(Check),
}

fn evaluate(ctx: &KernelContext, job: &Job, tol: f64) -> Outcome {
    let tilts = match &job.tilts {
        Ok(t) => t,
        Err(e) => return Outcome::Checked(vec![Check::error(job.name.clone(), e.to_string())]),
    };
    let stream = job.stream.map_or(Value::Null, |s| json!(s));
    let rhs = match tilted_fredholm_rhs_in(ctx, tilts, job.n) {
        Ok(r) => r,
        Err(e @ Error::Degenerate { .. }) => {
            return Outcome::Skipped(
                Check::property(job.name.clone(), Value::Null, Value::Null, true)
                    .with("skipped", json!(true))
                    .with("reason", json!(e.to_string()))
                    .with("stream", stream),
            )
        }
        Err(e) => return Outcome::Checked(vec![Check::error(job.name.clone(), e.to_string())]),
    };
    let lhs = match tilted_minor_direct(&ctx.fact.phi, tilts, job.n) {
        Ok(v) => v,
        Err(e) => return Outcome::Checked(vec![Check::error(job.name.clone(), e.to_string())]),
    };
    let mut checks = vec![Check::relative(job.name.clone(), lhs, rhs.value.value(), tol)
        .with("cond_gamma", json!(rhs.cond_gamma))
        .with("cond_b", json!(rhs.cond_b))
        .with("used_fixed_tail", json!(rhs.used_fixed_tail))
        .with("path_delta", json!(rhs.path_delta))
        .with("stream", stream)];
    if let Some(rank) = rhs.correction_rank {
        let bound = tilts.d_xi + tilts.d_theta;
        checks.push(
            Check::property(format!("{}/rank", job.name), json!(rank), json!(bound), rank <= bound)
                .with("threshold", json!("1e-9 |K|")),
        );
    }
    Outcome::Checked(checks)
}

pub fn run(cfg: &SuiteConfig) -> Vec<Check> {
    let mut symbols = cfg.configured_symbols();
    if symbols.is_empty() {
        symbols = vec![exp_spec(&[0.3]), exp_spec(&[0.2, 0.05]), rational_spec(&[], &[0.3, 0.5])];
    }
    let n_list = cfg.sizes.n_list.clone().unwrap_or_else(|| (1..=6).collect());
    let opts = &cfg.tilted;
    let mut out = Vec::new();
    for (si, spec) in symbols.iter().enumerate() {
        let label = spec.label();
        let ctx = match factorize(cfg, spec).and_then(|f| KernelContext::new(&f, cfg.m())) {
            Ok(c) => c,
            Err(e) => {
                out.push(Check::error(label, e.to_string()));
                continue;
            }
        };
        // One group per N; the degenerate budget applies to each group.
        let groups: Vec<(usize, Vec<Job>)> = match &cfg.tilts {
            Some(ts) => {
                let n = ts.xi.len();
                vec![(
                    n,
                    vec![Job {
                        name: format!("{label}/N={n}/configured"),
                        n,
                        tilts: tilts_from_spec(ts),
                        stream: None,
                    }],
                )]
            }
            None => n_list
                .iter()
                .map(|&n| {
                    let jobs = (0..opts.families)
                        .map(|k| {
                            let stream = ((si as u64) << 40) | ((n as u64) << 20) | k as u64;
                            Job {
                                name: format!("{label}/N={n}/family={k}"),
                                n,
                                tilts: random_tilts(cfg.seed, stream, n, opts.degree),
                                stream: Some(stream),
                            }
                        })
                        .collect();
                    (n, jobs)
                })
                .collect(),
        };
        for (n, jobs) in groups {
            let outcomes: Vec<Outcome> = jobs.par_iter().map(|j| evaluate(&ctx, j, cfg.tol)).collect();
            let mut skipped = 0;
            for o in outcomes {
                match o {
                    Outcome::Checked(c) => out.extend(c),
                    Outcome::Skipped(c) => {
                        skipped += 1;
                        out.push(c);
                    }
                }
            }
            out.push(Check::property(
                format!("{label}/N={n}/degenerate"),
                json!(skipped),
                json!(opts.max_degenerate),
                skipped <= opts.max_degenerate,
            ));
        }
    }
    out
}
