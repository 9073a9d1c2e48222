//! Bialternants, Grothendieck reductions and Cauchy-Binet expansions.

use bogc_core::series::{make_rational_factor, LaurentSeries, Side};
use bogc_core::symfun::{
    bialternant, bialternant_factorization_check, cauchy_binet_adaptive, cauchy_binet_sum, cauchy_product,
    default_decay_ratio, enumerate_partitions, grothendieck_eval, schur_tilts, skew_schur_expansion_check,
    ssyt_skew_schur, GrothendieckVariant, Partition,
};
use bogc_core::tilt::{tilted_minor_direct, TiltFamily};
use bogc_core::C64;
use rayon::prelude::*;
use serde_json::json;

use super::{exp_spec, factorize, list_label, partition_label, random_tilts, rational_spec, reals, tilts_from_spec};
use crate::config::{SuiteConfig, SymbolSpec};
use crate::report::Check;

const PLUS_ORDER: usize = 256;

pub fn run_bialternant(cfg: &SuiteConfig) -> Vec<Check> {
    let opts = &cfg.bialternant;
    let tol = cfg.tolerances.bialternant;
    let ys = reals(&opts.alphabet);
    let n = ys.len();
    let parts = enumerate_partitions(opts.max_weight, n);
    let mut out = Vec::new();
    for pts in &opts.phi_plus {
        let plus_label = format!("phi+=({})", list_label(pts));
        let phi_plus = if pts.is_empty() {
            Ok(LaurentSeries::one())
        } else {
            make_rational_factor(&reals(pts), Side::Plus, PLUS_ORDER)
        };
        let phi_plus = match phi_plus {
            Ok(p) => p,
            Err(e) => {
                out.push(Check::error(format!("factorization/{plus_label}"), e.to_string()));
                continue;
            }
        };
        let checks: Vec<Check> = parts
            .par_iter()
            .map(|lam| {
                let name = format!("factorization/{plus_label}/{}", partition_label(lam));
                match bialternant_factorization_check(&schur_tilts(lam, n), &ys, &phi_plus, n) {
                    Ok((lhs, rhs)) => Check::relative(name, lhs, rhs, tol),
                    Err(e) => Check::error(name, e.to_string()),
                }
            })
            .collect();
        out.extend(checks);
    }
    let empty = Partition::empty(n);
    let schur: Vec<Vec<Check>> = parts
        .par_iter()
        .map(|lam| {
            let label = partition_label(lam);
            let oracle = ssyt_skew_schur(lam, &empty, &ys);
            let mut v = Vec::new();
            v.push(match bialternant(&schur_tilts(lam, n), &ys) {
                Ok(s) => Check::relative(format!("schur/{label}"), s, oracle, tol),
                Err(e) => Check::error(format!("schur/{label}"), e.to_string()),
            });
            for (tag, variant) in [("G", GrothendieckVariant::G), ("GTilde", GrothendieckVariant::GTilde)] {
                let name = format!("grothendieck/{tag}/beta=0/{label}");
                v.push(match grothendieck_eval(lam, C64::new(0.0, 0.0), &ys, variant) {
                    Ok(g) => Check::relative(name, g, oracle, cfg.tolerances.grothendieck),
                    Err(e) => Check::error(name, e.to_string()),
                });
            }
            v
        })
        .collect();
    out.extend(schur.into_iter().flatten());
    out
}

struct CbCase {
    name: String,
    spec: SymbolSpec,
    tilts: bogc_core::Result<TiltFamily>,
}

fn default_cases(cfg: &SuiteConfig) -> Vec<CbCase> {
    let seed = cfg.seed;
    let stream = |k: u64| (1u64 << 60) | k;
    vec![
        CbCase {
            name: "exp(0.3)/N=3/random".into(),
            spec: exp_spec(&[0.3]),
            tilts: random_tilts(seed, stream(0), 3, 2),
        },
        CbCase {
            name: "exp(0.2,0.05)/N=2/random".into(),
            spec: exp_spec(&[0.2, 0.05]),
            tilts: random_tilts(seed, stream(1), 2, 2),
        },
        CbCase {
            name: "rat(0.3,0.2;0.4)/N=2/ones".into(),
            spec: rational_spec(&[0.3, 0.2], &[0.4]),
            tilts: Ok(TiltFamily::ones(2)),
        },
        CbCase {
            name: "rat(;0.3,0.5)/N=2/random".into(),
            spec: rational_spec(&[], &[0.3, 0.5]),
            tilts: random_tilts(seed, stream(2), 2, 2),
        },
    ]
}

fn configured_cases(cfg: &SuiteConfig) -> Vec<CbCase> {
    cfg.configured_symbols()
        .into_iter()
        .enumerate()
        .map(|(i, spec)| {
            let (tilts, tag) = match &cfg.tilts {
                Some(t) => (tilts_from_spec(t), "configured".to_string()),
                None => (random_tilts(cfg.seed, (1u64 << 61) | i as u64, 2, 2), "random".to_string()),
            };
            let n = tilts.as_ref().map_or(0, TiltFamily::n);
            CbCase {
                name: format!("{}/N={n}/{tag}", spec.label()),
                spec,
                tilts,
            }
        })
        .collect()
}

fn cauchy_binet_case(cfg: &SuiteConfig, case: &CbCase) -> Check {
    let name = format!("sum/{}", case.name);
    let run = || -> bogc_core::Result<Check> {
        let tilts = case.tilts.clone()?;
        let n = tilts.n();
        let fact = factorize(cfg, &case.spec)?;
        let rho = default_decay_ratio(&fact.symbol);
        let cap = cfg.cauchy_binet.max_cutoff;
        let s = cauchy_binet_adaptive(&fact, &tilts, n, rho, 1e-8, cap)?;
        let direct = tilted_minor_direct(&fact.phi, &tilts, n)?;
        let tol = 1e-8f64.max(s.tail_estimate);
        let mut c = Check::absolute(name.clone(), s.partial_sum, direct, tol);
        c.pass = c.pass && s.weight_cutoff <= cap;
        Ok(c.with("tail_estimate", json!(s.tail_estimate))
            .with("weight_cutoff", json!(s.weight_cutoff))
            .with("terms", json!(s.terms))
            .with("decay_ratio", json!(rho)))
    };
    run().unwrap_or_else(|e| Check::error(name, e.to_string()))
}

fn gessel_case(cfg: &SuiteConfig, xs: &[f64], ys: &[f64], n: usize) -> Vec<Check> {
    let label = format!("gessel/({};{})/N={n}", list_label(xs), list_label(ys));
    let run = || -> bogc_core::Result<Vec<Check>> {
        let fact = factorize(cfg, &rational_spec(xs, ys))?;
        let product = cauchy_product(&reals(xs), &reals(ys));
        let ones = TiltFamily::ones(n);
        let s = cauchy_binet_sum(&fact, &ones, n, cfg.cauchy_binet.max_cutoff, default_decay_ratio(&fact.symbol))?;
        let direct = tilted_minor_direct(&fact.phi, &ones, n)?;
        Ok(vec![
            Check::absolute(format!("{label}/sum"), s.partial_sum, product, 1e-8)
                .with("weight_cutoff", json!(s.weight_cutoff)),
            Check::absolute(format!("{label}/minor"), direct, product, 1e-8),
        ])
    };
    run().unwrap_or_else(|e| vec![Check::error(label, e.to_string())])
}

fn skew_case(cfg: &SuiteConfig, xs: &[f64], ys: &[f64], lam: &[usize], nu: &[usize], n: usize) -> Check {
    let name = format!("skew/({};{})/lambda=({})/nu=({})", list_label(xs), list_label(ys), join(lam), join(nu));
    let run = || -> bogc_core::Result<Check> {
        let fact = factorize(cfg, &rational_spec(xs, ys))?;
        let lam = Partition::new(lam.to_vec(), n)?;
        let nu = Partition::new(nu.to_vec(), n)?;
        let r = skew_schur_expansion_check(&fact, &lam, &nu, n, 30)?;
        Ok(Check::absolute(name.clone(), r.partial_sum, r.direct, 1e-8)
            .with("min_summand", json!(r.min_summand))
            .with("terms", json!(r.terms)))
    };
    run().unwrap_or_else(|e| Check::error(name, e.to_string()))
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn run_cauchy_binet(cfg: &SuiteConfig) -> Vec<Check> {
    let cases = if cfg.configured_symbols().is_empty() {
        default_cases(cfg)
    } else {
        configured_cases(cfg)
    };
    let mut out: Vec<Check> = cases.par_iter().map(|c| cauchy_binet_case(cfg, c)).collect();
    let gessel: [(&[f64], &[f64], usize); 3] = [
        (&[0.3, 0.2], &[0.4], 2),
        (&[0.5], &[0.3, 0.6, 0.2], 3),
        (&[0.4, 0.1, 0.3], &[0.2, 0.5], 3),
    ];
    let g: Vec<Vec<Check>> = gessel.par_iter().map(|&(x, y, n)| gessel_case(cfg, x, y, n)).collect();
    out.extend(g.into_iter().flatten());
    out.push(skew_case(cfg, &[0.3], &[0.4], &[1], &[], 2));
    out.push(skew_case(cfg, &[0.3, 0.1], &[0.4, 0.2], &[2, 1], &[1], 2));
    out
}
