//! Command-line surface of the `radmhd` binary.
//!
//! | exit code | meaning |
//! |---|---|
//! | 0 | success (for `mms` and `audit`: every check passed) |
//! | 1 | `mms` orders or `audit` checks not met, or an output file could not be written |
//! | 2 | bad command line, unreadable input or invalid configuration |
//! | 3 | the simulation aborted |

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::parse_config;
use crate::diagnostics::{check_estimates, Tolerances};
use crate::mms::{run_convergence, ConvergenceTable, MmsCase};
use crate::output;
use crate::physics::PhysParams;
use crate::run::{simulate, write_outputs};
use crate::stepper::StepControl;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "radmhd", about = "Free-boundary radiative MHD in mass coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a configured experiment and audit it.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Manufactured-solution convergence study.
    Mms {
        #[arg(long)]
        case: String,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 0.05)]
        t_final: f64,
        /// Directory receiving convergence.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Re-run the estimate checks on a written time series.
    Audit {
        #[arg(long)]
        timeseries: PathBuf,
    },
    /// Print the version.
    Version,
}

/// Parses `argv` (including the program name), executes the command and
/// returns the process exit code.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match cli.command {
        Command::Run { config, out: dir } => cmd_run(config, dir, out, err),
        Command::Mms { case, levels, t_final, out: dir } => cmd_mms(&case, &levels, t_final, dir, out, err),
        Command::Audit { timeseries } => match output::read_timeseries_file(&timeseries) {
            Ok(series) => {
                let report = check_estimates(&series, &Tolerances::default());
                let _ = write!(out, "{}", report.render());
                if report.passed() {
                    EXIT_OK
                } else {
                    EXIT_CHECK_FAILED
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error: cannot read time series: {e}");
                EXIT_USAGE
            }
        },
        Command::Version => {
            let _ = writeln!(out, "radmhd {}", env!("CARGO_PKG_VERSION"));
            EXIT_OK
        }
    }
}

fn cmd_run(config: PathBuf, dir: Option<PathBuf>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match std::fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", config.display());
            return EXIT_USAGE;
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error in {}: {e}", config.display());
            return EXIT_USAGE;
        }
    };
    let outcome = match simulate(&cfg) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ABORT;
        }
    };
    let dir = dir.unwrap_or_else(|| cfg.output.directory.clone());
    if let Err(e) = write_outputs(&cfg, &outcome, &dir) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_CHECK_FAILED;
    }
    let _ = write!(out, "{}{}", outcome.summary(), outcome.audit.render());
    let _ = writeln!(out, "outputs written to {}", dir.display());
    EXIT_OK
}

fn cmd_mms(
    case: &str,
    levels: &[usize],
    t_final: f64,
    dir: PathBuf,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let Some(case) = MmsCase::by_name(case) else {
        let _ = writeln!(err, "error: unknown case `{case}` (known: {})", MmsCase::NAMES.join(", "));
        return EXIT_USAGE;
    };
    let table = match run_convergence(&case, levels, t_final, &PhysParams::default(), &StepControl::default()) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ABORT;
        }
    };
    let path = dir.join("convergence.csv");
    if let Err(e) = std::fs::create_dir_all(&dir)
        .map_err(|source| output::OutputError::Io { path: dir.display().to_string(), source })
        .and_then(|_| output::write_convergence_file(&path, &table))
    {
        let _ = writeln!(err, "error: {e}");
        return EXIT_CHECK_FAILED;
    }
    let _ = write!(out, "{}", render_table(&table));
    if table.meets_required_orders() {
        EXIT_OK
    } else {
        let _ = writeln!(err, "observed orders below the required 1.8 (v, u, theta) / 1.5 (w, b)");
        EXIT_CHECK_FAILED
    }
}

fn render_table(t: &ConvergenceTable) -> String {
    let mut s = format!("case {} to t = {}\n{:>6} {:>6} {:>12} {:>12} {:>7}\n", t.case, t.t_final, "N", "field", "L2", "Linf", "order");
    for r in &t.rows {
        let order = r.order.map_or_else(|| "-".to_string(), |o| format!("{o:.3}"));
        s.push_str(&format!("{:>6} {:>6} {:>12.4e} {:>12.4e} {:>7}\n", r.n, r.field, r.l2, r.linf, order));
    }
    s
}
