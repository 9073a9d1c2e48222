//! Suite implementations. Each returns its checks in a fixed order; work
//! inside a suite fans out over rayon and is merged back in order.

mod airy;
mod bogc;
mod closure;
mod flows;
mod symfun;
mod tilted;

use bogc_core::series::{series_log_split, LaurentSeries, SymbolFactorization};
use bogc_core::symfun::Partition;
use bogc_core::tilt::TiltFamily;
use bogc_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{SuiteConfig, SymbolSpec, TiltSpec};
use crate::report::{Check, SuiteReport};

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> SuiteReport {
    let checks = match name {
        "bogc" => bogc::run(cfg),
        "tilted" => tilted::run(cfg),
        "bialternant" => symfun::run_bialternant(cfg),
        "cauchy-binet" => symfun::run_cauchy_binet(cfg),
        "flows" => flows::run(cfg),
        "closure" => closure::run(cfg),
        "airy" => airy::run(cfg),
        other => vec![Check::error(other, "unknown suite")],
    };
    SuiteReport {
        name: name.to_string(),
        checks,
    }
}

pub(crate) fn half_width(cfg: &SuiteConfig) -> usize {
    cfg.sizes.half_width.unwrap_or(2 * cfg.m() + 64)
}

pub(crate) fn factorize(cfg: &SuiteConfig, spec: &SymbolSpec) -> bogc_core::Result<SymbolFactorization> {
    series_log_split(&spec.to_symbol(), half_width(cfg))
}

pub(crate) fn exp_spec(times: &[f64]) -> SymbolSpec {
    SymbolSpec::Exponential { times: times.to_vec() }
}

pub(crate) fn rational_spec(plus: &[f64], minus: &[f64]) -> SymbolSpec {
    use crate::config::Number;
    SymbolSpec::Rational {
        plus: plus.iter().map(|&x| Number::Real(x)).collect(),
        minus: minus.iter().map(|&x| Number::Real(x)).collect(),
    }
}

pub(crate) fn tilts_from_spec(spec: &TiltSpec) -> bogc_core::Result<TiltFamily> {
    let conv = |c: &[crate::config::Number]| c.iter().map(|x| x.to_c64()).collect::<Vec<_>>();
    let xi = spec
        .xi
        .iter()
        .map(|c| LaurentSeries::polynomial(0, conv(c)))
        .collect::<bogc_core::Result<Vec<_>>>()?;
    let theta = spec
        .theta
        .iter()
        .map(|c| LaurentSeries::polynomial(0, conv(c)).map(|p| p.reflect()))
        .collect::<bogc_core::Result<Vec<_>>>()?;
    TiltFamily::new(xi, theta)
}

/// Degree-`d` real polynomial tilts with coefficients uniform in `[-1, 1]`,
/// drawn from stream `stream` of the seed so every family is addressable.
pub(crate) fn random_tilts(seed: u64, stream: u64, n: usize, d: usize) -> bogc_core::Result<TiltFamily> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut poly = || -> Vec<C64> { (0..=d).map(|_| C64::new(rng.gen_range(-1.0..=1.0), 0.0)).collect() };
    let xi = (0..n)
        .map(|_| LaurentSeries::polynomial(0, poly()))
        .collect::<bogc_core::Result<Vec<_>>>()?;
    let theta = (0..n)
        .map(|_| LaurentSeries::polynomial(0, poly()).map(|p| p.reflect()))
        .collect::<bogc_core::Result<Vec<_>>>()?;
    TiltFamily::new(xi, theta)
}

pub(crate) fn partition_label(p: &Partition) -> String {
    let parts: Vec<String> = p.parts().iter().filter(|&&x| x > 0).map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

pub(crate) fn reals(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

pub(crate) fn list_label(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}
