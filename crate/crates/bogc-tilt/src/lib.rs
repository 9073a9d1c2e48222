//! Suite runner for the `bogc-core` identities: strict JSON configs in,
//! canonical JSON reports out.

pub mod config;
pub mod report;
mod suites;

use config::SuiteConfig;
use report::{Environment, Report};

pub use config::{config_parse, config_parse_str, ConfigError, SUITES};
pub use report::report_write;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "BOGC_TILT_THREADS";

/// Runs the selected suites on the current rayon pool. Suites run in their
/// canonical order and the report is merged in that order.
pub fn run_suite(cfg: &SuiteConfig) -> Report {
    let suites = cfg
        .selected_suites()
        .into_iter()
        .map(|name| suites::run_suite(name, cfg))
        .collect();
    Report {
        suites,
        environment: Environment::current(cfg.seed),
    }
}

/// Runs on a dedicated pool of `threads` workers, or rayon's default when
/// `None`.
pub fn run_with_threads(cfg: &SuiteConfig, threads: Option<usize>) -> Report {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    match builder.build() {
        Ok(pool) => pool.install(|| run_suite(cfg)),
        Err(_) => run_suite(cfg),
    }
}

/// Worker cap from `BOGC_TILT_THREADS`; unset, empty or zero means no cap.
pub fn thread_cap_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Honors the environment cap when it is below the machine's parallelism.
pub fn effective_threads() -> Option<usize> {
    let cap = thread_cap_from_env()?;
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    Some(cap.min(available))
}
