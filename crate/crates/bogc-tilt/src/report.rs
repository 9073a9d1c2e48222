//! Check records and the canonical JSON report.

use std::path::Path;

use bogc_core::C64;
use serde_json::{json, Map, Value};

/// One comparison. `rel_err` is `abs_err / |rhs|`, or `abs_err` when the
/// reference vanishes.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub lhs: Value,
    pub rhs: Value,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
    /// Check-specific diagnostics, merged into the record.
    pub extra: Map<String, Value>,
}

pub fn complex_value(z: C64) -> Value {
    json!([z.re, z.im])
}

fn rel(abs_err: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        abs_err / reference
    } else {
        abs_err
    }
}

impl Check {
    fn base(name: impl Into<String>, lhs: Value, rhs: Value, abs_err: f64, rel_err: f64, pass: bool) -> Self {
        Check {
            name: name.into(),
            lhs,
            rhs,
            abs_err,
            rel_err,
            pass,
            extra: Map::new(),
        }
    }

    /// Passes when the relative error is within `tol`.
    pub fn relative(name: impl Into<String>, lhs: C64, rhs: C64, tol: f64) -> Self {
        let abs_err = (lhs - rhs).norm();
        let rel_err = rel(abs_err, rhs.norm());
        Self::base(name, complex_value(lhs), complex_value(rhs), abs_err, rel_err, rel_err <= tol)
    }

    /// Passes when the absolute error is within `tol`.
    pub fn absolute(name: impl Into<String>, lhs: C64, rhs: C64, tol: f64) -> Self {
        let abs_err = (lhs - rhs).norm();
        let rel_err = rel(abs_err, rhs.norm());
        Self::base(name, complex_value(lhs), complex_value(rhs), abs_err, rel_err, abs_err <= tol)
    }

    pub fn real_absolute(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let abs_err = (lhs - rhs).abs();
        let rel_err = rel(abs_err, rhs.abs());
        Self::base(name, json!(lhs), json!(rhs), abs_err, rel_err, abs_err <= tol)
    }

    /// A precomputed discrepancy (e.g. a matrix max-norm) against zero.
    pub fn discrepancy(name: impl Into<String>, err: f64, tol: f64) -> Self {
        Self::base(name, json!(err), json!(0.0), err, err, err <= tol)
    }

    /// Exact comparison of integer-valued data.
    pub fn exact(name: impl Into<String>, lhs: Value, rhs: Value) -> Self {
        let pass = lhs == rhs;
        let err = if pass { 0.0 } else { 1.0 };
        Self::base(name, lhs, rhs, err, err, pass)
    }

    /// A property that holds or not, with its own rule.
    pub fn property(name: impl Into<String>, lhs: Value, rhs: Value, pass: bool) -> Self {
        let err = if pass { 0.0 } else { 1.0 };
        Self::base(name, lhs, rhs, err, err, pass)
    }

    /// A check that could not be evaluated.
    pub fn error(name: impl Into<String>, message: impl Into<String>) -> Self {
        let mut c = Self::base(name, Value::Null, Value::Null, f64::INFINITY, f64::INFINITY, false);
        c.extra.insert("error".into(), Value::String(message.into()));
        c
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.extra.insert(key.into(), value);
        self
    }

    pub fn to_value(&self) -> Value {
        let mut m = self.extra.clone();
        m.insert("name".into(), Value::String(self.name.clone()));
        m.insert("lhs".into(), self.lhs.clone());
        m.insert("rhs".into(), self.rhs.clone());
        m.insert("abs_err".into(), finite_or_string(self.abs_err));
        m.insert("rel_err".into(), finite_or_string(self.rel_err));
        m.insert("pass".into(), Value::Bool(self.pass));
        Value::Object(m)
    }
}

/// JSON has no infinities; non-finite errors are written as strings.
fn finite_or_string(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(format!("{x}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    pub version: String,
    pub seed: u64,
    /// Seconds since the epoch from `SOURCE_DATE_EPOCH`, else zero, so
    /// reports stay byte-identical across runs.
    pub timestamp: u64,
}

impl Environment {
    pub fn current(seed: u64) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(0);
        Environment {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            timestamp,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub suites: Vec<SuiteReport>,
    pub environment: Environment,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.suites.iter().all(SuiteReport::pass)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &Check)> {
        self.suites
            .iter()
            .flat_map(|s| s.checks.iter().map(move |c| (s.name.as_str(), c)))
            .filter(|(_, c)| !c.pass)
    }

    pub fn to_value(&self) -> Value {
        let suites: Vec<Value> = self
            .suites
            .iter()
            .map(|s| {
                json!({
                    "name": s.name,
                    "pass": s.pass(),
                    "checks": s.checks.iter().map(Check::to_value).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "environment": {
                "version": self.environment.version,
                "seed": self.environment.seed,
                "timestamp": self.environment.timestamp,
            },
            "pass": self.pass(),
            "suites": suites,
        })
    }

    /// Compact JSON with sorted keys, shortest round-trip floats and every
    /// non-ASCII character escaped, followed by a newline.
    pub fn to_canonical_json(&self) -> String {
        canonical_json(&self.to_value())
    }
}

pub fn canonical_json(v: &Value) -> String {
    // serde_json's map is ordered by key unless `preserve_order` is enabled,
    // and its float formatting is shortest round-trip.
    let raw = serde_json::to_string(v).expect("JSON values serialize");
    let mut out = String::with_capacity(raw.len() + 1);
    for ch in raw.chars() {
        if ch.is_ascii() {
            out.push(ch);
        } else {
            let mut buf = [0u16; 2];
            for unit in ch.encode_utf16(&mut buf) {
                out.push_str(&format!("\\u{unit:04x}"));
            }
        }
    }
    out.push('\n');
    out
}

pub fn report_write(report: &Report, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, report.to_canonical_json())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            suites: vec![SuiteReport {
                name: "bogc".into(),
                checks: vec![
                    Check::relative("a", C64::new(1.0, 0.0), C64::new(1.0 + 1e-12, 0.0), 1e-8),
                    Check::error("b", "caf\u{e9}"),
                ],
            }],
            environment: Environment {
                version: "0.1.0".into(),
                seed: 7,
                timestamp: 0,
            },
        }
    }

    #[test]
    fn canonical_output_is_sorted_ascii_and_stable() {
        let r = sample();
        let s = r.to_canonical_json();
        assert!(s.is_ascii() && s.ends_with('\n'));
        assert!(s.contains("caf\\u00e9"));
        assert!(s.starts_with("{\"environment\":{\"seed\":7,\"timestamp\":0,\"version\":\"0.1.0\"},\"pass\":false"));
        assert_eq!(s, r.to_canonical_json());
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["suites"][0]["checks"][1]["abs_err"], "inf");
    }

    #[test]
    fn floats_round_trip() {
        let x = 0.1 + 0.2;
        let s = canonical_json(&json!([x, 1e-300, -0.0]));
        assert_eq!(s, "[0.30000000000000004,1e-300,-0.0]\n");
    }

    #[test]
    fn pass_rules() {
        assert!(Check::relative("r", C64::new(2.0, 0.0), C64::new(2.0, 1e-9), 1e-9).pass);
        assert!(!Check::absolute("a", C64::new(0.0, 0.0), C64::new(1e-7, 0.0), 1e-8).pass);
        assert!(Check::exact("e", json!([12, 15]), json!([12, 15])).pass);
        assert!(!Check::exact("e", json!([12, 14]), json!([12, 15])).pass);
        let empty = Report {
            suites: vec![],
            environment: Environment::current(0),
        };
        assert!(empty.pass());
    }
}
