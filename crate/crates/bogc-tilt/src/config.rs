//! Strict JSON suite configuration.

use std::fmt;
use std::path::Path;

use bogc_core::series::Symbol;
use bogc_core::C64;
use serde::Deserialize;

/// Suites in the order they run.
pub const SUITES: [&str; 7] = ["bogc", "tilted", "bialternant", "cauchy-binet", "flows", "closure", "airy"];

pub const DEFAULT_M: usize = 128;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Parse(String),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(m) => write!(f, "cannot read config: {m}"),
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// One suite name or a list of them.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SuiteSelection {
    One(String),
    Many(Vec<String>),
}

/// A complex number given as a real scalar or as `[re, im]`.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl Number {
    pub fn to_c64(self) -> C64 {
        match self {
            Number::Real(x) => C64::new(x, 0.0),
            Number::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SymbolSpec {
    Exponential {
        times: Vec<f64>,
    },
    Rational {
        #[serde(default)]
        plus: Vec<Number>,
        #[serde(default)]
        minus: Vec<Number>,
    },
}

impl SymbolSpec {
    pub fn to_symbol(&self) -> Symbol {
        match self {
            SymbolSpec::Exponential { times } => Symbol::exponential(times),
            SymbolSpec::Rational { plus, minus } => {
                let c = |v: &[Number]| v.iter().map(|x| x.to_c64()).collect::<Vec<_>>();
                Symbol::rational(&c(plus), &c(minus))
            }
        }
    }

    pub fn label(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        match self {
            SymbolSpec::Exponential { times } => format!("exp({})", list(times)),
            SymbolSpec::Rational { plus, minus } => {
                let c = |v: &[Number]| {
                    v.iter()
                        .map(|x| match x {
                            Number::Real(r) => format!("{r}"),
                            Number::Complex([a, b]) => format!("{a}{b:+}i"),
                        })
                        .collect::<Vec<_>>()
                        .join(",")
                };
                format!("rat({};{})", c(plus), c(minus))
            }
        }
    }

    fn validate(&self, field: &str) -> Result<(), ConfigError> {
        match self {
            SymbolSpec::Exponential { times } => {
                if times.is_empty() {
                    return Err(invalid(format!("{field}.times must be nonempty")));
                }
                if let Some(i) = times.iter().position(|t| !t.is_finite()) {
                    return Err(invalid(format!("{field}.times[{i}] is not finite")));
                }
            }
            SymbolSpec::Rational { plus, minus } => {
                for (side, pts) in [("plus", plus), ("minus", minus)] {
                    for (i, p) in pts.iter().enumerate() {
                        let z = p.to_c64();
                        if !(z.norm() < 1.0) {
                            return Err(invalid(format!(
                                "{field}.{side}[{i}]: |{side} point| = {} must be < 1 \
                                 (phi_+ analytic in the closed disk, phi_- analytic outside it)",
                                z.norm()
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// `{"xi": [[c_0, c_1, ...], ...], "theta": [[d_0, d_1, ...], ...]}` meaning
/// `xi_j = sum c_k z^k` and `theta_i = sum d_k z^{-k}`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TiltSpec {
    pub xi: Vec<Vec<Number>>,
    pub theta: Vec<Vec<Number>>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Sizes {
    #[serde(rename = "N_list")]
    pub n_list: Option<Vec<usize>>,
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
    pub half_width: Option<usize>,
}

impl Default for Sizes {
    fn default() -> Self {
        Sizes {
            n_list: None,
            m: DEFAULT_M,
            half_width: None,
        }
    }
}

fn default_m() -> usize {
    DEFAULT_M
}

/// Per-check tolerances; each defaults to the value the check is pinned at.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub bialternant: f64,
    pub grothendieck: f64,
    pub flows: f64,
    pub pushthrough: f64,
    pub spiked_kernel: f64,
    pub discrete_chain: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            bialternant: 1e-9,
            grothendieck: 1e-10,
            flows: 1e-6,
            pushthrough: 1e-8,
            spiked_kernel: 1e-9,
            discrete_chain: 1e-7,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TiltedOptions {
    /// Random tilt families per symbol and `N`.
    pub families: usize,
    /// Polynomial degree of random tilts.
    pub degree: usize,
    /// Degenerate charts tolerated per group of `families`.
    pub max_degenerate: usize,
}

impl Default for TiltedOptions {
    fn default() -> Self {
        TiltedOptions {
            families: 20,
            degree: 2,
            max_degenerate: 2,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BialternantOptions {
    /// Alphabet `Y` of the minus factor.
    pub alphabet: Vec<f64>,
    /// Each entry lists the points of one `phi_+ = prod (1 - x z)^{-1}`.
    pub phi_plus: Vec<Vec<f64>>,
    pub max_weight: usize,
}

impl Default for BialternantOptions {
    fn default() -> Self {
        BialternantOptions {
            alphabet: vec![0.3, 0.5, 0.7],
            phi_plus: vec![vec![], vec![0.2]],
            max_weight: 5,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CauchyBinetOptions {
    pub max_cutoff: usize,
}

impl Default for CauchyBinetOptions {
    fn default() -> Self {
        CauchyBinetOptions { max_cutoff: 40 }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FlowOptions {
    #[serde(rename = "M")]
    pub m: usize,
    pub r_list: Vec<usize>,
    /// Time vectors for the flow checks and the Szego values.
    pub times: Vec<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: usize,
    pub tilt_degree: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            m: 64,
            r_list: vec![1, 2],
            times: vec![vec![0.3], vec![0.2, 0.05], vec![0.25, 0.02]],
            n: 2,
            tilt_degree: 1,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ClosureOptions {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub samples: usize,
    pub t_lo: Vec<f64>,
    pub t_hi: Vec<f64>,
    /// Rank pair expected for both quantity families.
    pub expected: [usize; 2],
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions {
            n: 3,
            d: 2,
            samples: 80,
            t_lo: vec![0.1, 0.0],
            t_hi: vec![0.4, 0.1],
            expected: [12, 15],
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AiryOptions {
    pub order: usize,
    pub w: Vec<f64>,
    pub s: Vec<f64>,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    #[serde(rename = "L_exact")]
    pub l_exact: f64,
    pub spike_w: f64,
}

impl Default for AiryOptions {
    fn default() -> Self {
        AiryOptions {
            order: 60,
            w: vec![0.5, 1.0, 2.0],
            s: vec![-2.0, 0.0, 1.0],
            a: 0.25,
            b: 0.02,
            l: vec![50.0, 100.0, 200.0],
            l_exact: 20.0,
            spike_w: 1.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub suite: Option<SuiteSelection>,
    pub symbol: Option<SymbolSpec>,
    #[serde(default)]
    pub symbols: Vec<SymbolSpec>,
    pub tilts: Option<TiltSpec>,
    #[serde(default)]
    pub sizes: Sizes,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tilted: TiltedOptions,
    #[serde(default)]
    pub bialternant: BialternantOptions,
    #[serde(default)]
    pub cauchy_binet: CauchyBinetOptions,
    #[serde(default)]
    pub flows: FlowOptions,
    #[serde(default)]
    pub closure: ClosureOptions,
    #[serde(default)]
    pub airy: AiryOptions,
    pub out: Option<String>,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl Default for SuiteConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config parses")
    }
}

impl SuiteConfig {
    /// Suites to run, in canonical order. No selection means all suites.
    pub fn selected_suites(&self) -> Vec<&'static str> {
        match &self.suite {
            None => SUITES.to_vec(),
            Some(sel) => {
                let names: Vec<&str> = match sel {
                    SuiteSelection::One(s) => vec![s.as_str()],
                    SuiteSelection::Many(v) => v.iter().map(String::as_str).collect(),
                };
                SUITES.iter().copied().filter(|s| names.contains(s)).collect()
            }
        }
    }

    /// Replaces the suite selection, e.g. from command-line flags.
    pub fn select(&mut self, names: &[String]) -> Result<(), ConfigError> {
        self.suite = Some(SuiteSelection::Many(names.to_vec()));
        self.validate()
    }

    /// Symbols configured explicitly, `symbol` first.
    pub fn configured_symbols(&self) -> Vec<SymbolSpec> {
        self.symbol.iter().chain(&self.symbols).cloned().collect()
    }

    pub fn m(&self) -> usize {
        self.sizes.m
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(sel) = &self.suite {
            let names: Vec<&String> = match sel {
                SuiteSelection::One(s) => vec![s],
                SuiteSelection::Many(v) => v.iter().collect(),
            };
            for n in names {
                if !SUITES.contains(&n.as_str()) {
                    return Err(invalid(format!("suite: unknown suite \"{n}\" (known: {})", SUITES.join(", "))));
                }
            }
        }
        if let Some(s) = &self.symbol {
            s.validate("symbol")?;
        }
        for (i, s) in self.symbols.iter().enumerate() {
            s.validate(&format!("symbols[{i}]"))?;
        }
        if let Some(t) = &self.tilts {
            if t.xi.len() != t.theta.len() || t.xi.is_empty() {
                return Err(invalid("tilts: xi and theta need the same nonzero length"));
            }
            for (name, list) in [("xi", &t.xi), ("theta", &t.theta)] {
                if let Some(i) = list.iter().position(|c| c.is_empty()) {
                    return Err(invalid(format!("tilts.{name}[{i}] has no coefficients")));
                }
            }
        }
        let positive = [
            ("tol", self.tol),
            ("tolerances.bialternant", self.tolerances.bialternant),
            ("tolerances.grothendieck", self.tolerances.grothendieck),
            ("tolerances.flows", self.tolerances.flows),
            ("tolerances.pushthrough", self.tolerances.pushthrough),
            ("tolerances.spiked_kernel", self.tolerances.spiked_kernel),
            ("tolerances.discrete_chain", self.tolerances.discrete_chain),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be a positive finite number")));
            }
        }
        if self.sizes.m < 16 {
            return Err(invalid("sizes.M must be at least 16"));
        }
        if let Some(list) = &self.sizes.n_list {
            if let Some(&n) = list.iter().find(|&&n| n == 0 || 2 * n > self.sizes.m) {
                return Err(invalid(format!("sizes.N_list entry {n} must lie in 1..=M/2")));
            }
        }
        if let Some(hw) = self.sizes.half_width {
            if hw < 2 * self.sizes.m {
                return Err(invalid("sizes.half_width must be at least 2 M"));
            }
        }
        if self.closure.t_lo.len() != self.closure.t_hi.len() || self.closure.t_lo.is_empty() {
            return Err(invalid("closure.t_lo and closure.t_hi need the same nonzero length"));
        }
        if self.flows.r_list.contains(&0) {
            return Err(invalid("flows.r_list entries are 1-based"));
        }
        if self.airy.order == 0 {
            return Err(invalid("airy.order must be positive"));
        }
        Ok(())
    }
}

/// Parses and validates a config; serde diagnostics carry line and column.
pub fn config_parse_str(text: &str) -> Result<SuiteConfig, ConfigError> {
    let cfg: SuiteConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn config_parse(path: &Path) -> Result<SuiteConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    config_parse_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = config_parse_str(r#"{"suite":"bogc","symbol":{"type":"exponential","times":[0.3]}}"#).unwrap();
        assert_eq!(c.m(), 128);
        assert_eq!(c.tol, 1e-8);
        assert_eq!(c.seed, 0);
        assert_eq!(c.selected_suites(), vec!["bogc"]);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = config_parse_str(r#"{"suite":"bogc","tiltz":[]}"#).unwrap_err().to_string();
        assert!(e.contains("tiltz") && e.contains("line 1"), "{e}");
        let e = config_parse_str(r#"{"sizes":{"M":64,"Q":1}}"#).unwrap_err().to_string();
        assert!(e.contains("`Q`"), "{e}");
    }

    #[test]
    fn rational_outside_disk_rejected() {
        let e = config_parse_str(r#"{"symbol":{"type":"rational","minus":[0.3,1.2]}}"#)
            .unwrap_err()
            .to_string();
        assert!(e.contains("symbol.minus[1]") && e.contains("analytic"), "{e}");
    }

    #[test]
    fn suite_selection_order_and_validation() {
        let c = config_parse_str(r#"{"suite":["airy","bogc"]}"#).unwrap();
        assert_eq!(c.selected_suites(), vec!["bogc", "airy"]);
        assert!(config_parse_str(r#"{"suite":"nope"}"#).is_err());
        assert!(config_parse_str(r#"{"suite":[]}"#).unwrap().selected_suites().is_empty());
        assert_eq!(SuiteConfig::default().selected_suites().len(), 7);
        assert!(config_parse_str(r#"{"tol":0}"#).is_err());
    }

    #[test]
    fn tilts_and_complex_points() {
        let c = config_parse_str(
            r#"{"tilts":{"xi":[[1.0],[0.0,1.0]],"theta":[[1.0],[1.0,-0.5]]},
                "symbol":{"type":"rational","plus":[[0.1,0.2]],"minus":[0.3]}}"#,
        )
        .unwrap();
        assert_eq!(c.tilts.unwrap().theta[1][1], Number::Real(-0.5));
        let s = c.symbol.unwrap().to_symbol();
        assert_eq!(s, Symbol::rational(&[C64::new(0.1, 0.2)], &[C64::new(0.3, 0.0)]));
    }
}
