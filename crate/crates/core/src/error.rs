use alloc::string::String;
use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A series does not carry the coefficients an operation needs.
    Window { needed_lo: i64, needed_hi: i64, have_lo: i64, have_hi: i64 },
    /// Argument outside the documented domain.
    Domain(String),
    /// A linear system had no unique solution.
    Singular(&'static str),
    /// A chart failed the conditioning gate.
    Degenerate { what: &'static str, cond: f64 },
    /// Two evaluation paths for one quantity disagreed.
    InternalConsistency { what: &'static str, delta: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Window { needed_lo, needed_hi, have_lo, have_hi } => write!(
                f,
                "series window [{have_lo}, {have_hi}] does not cover [{needed_lo}, {needed_hi}]"
            ),
            Error::Domain(msg) => write!(f, "{msg}"),
            Error::Singular(what) => write!(f, "singular matrix in {what}"),
            Error::Degenerate { what, cond } => {
                write!(f, "degenerate chart: cond({what}) = {cond:e} exceeds 1e12")
            }
            Error::InternalConsistency { what, delta } => {
                write!(f, "internal consistency failure in {what}: paths differ by {delta:e}")
            }
        }
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
