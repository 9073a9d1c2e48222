use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bogc_tilt::config::SuiteConfig;
use bogc_tilt::{config_parse, effective_threads, report_write, run_with_threads, SUITES};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bogc-tilt", about = "Checks tilted Toeplitz minor and Fredholm determinant identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run suites from a JSON config and write the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Report path; defaults to the config's `out`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Restrict to these suites (repeatable).
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
    /// Print the suite names in run order.
    ListSuites,
    /// Print the version.
    Version,
}

const EXIT_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn load(config: &Path, suites: &[String]) -> Result<SuiteConfig, String> {
    let mut cfg = config_parse(config).map_err(|e| e.to_string())?;
    if !suites.is_empty() {
        cfg.select(suites).map_err(|e| e.to_string())?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListSuites => {
            for s in SUITES {
                println!("{s}");
            }
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("bogc-tilt {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
        Command::Run { config, out, suites } => {
            let cfg = match load(&config, &suites) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let report = run_with_threads(&cfg, effective_threads());
            let out = out.or_else(|| cfg.out.as_ref().map(PathBuf::from));
            match &out {
                Some(path) => {
                    if let Err(e) = report_write(&report, path) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(EXIT_CONFIG);
                    }
                }
                None => print!("{}", report.to_canonical_json()),
            }
            for s in &report.suites {
                let failed = s.checks.iter().filter(|c| !c.pass).count();
                eprintln!("{}: {} checks, {} failed", s.name, s.checks.len(), failed);
            }
            for (suite, c) in report.failures() {
                eprintln!("FAIL {suite}/{}", c.name);
            }
            if report.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
    }
}
