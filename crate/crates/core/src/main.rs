// `!(a <= b)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use plcurve::config::ProblemConfig;
use plcurve::diagnostics::{annotate_curve, diagnose, invariant_report};
use plcurve::report::{curve_csv, curve_svg, profile_csv};
use plcurve::shooting::shoot_and_scale;
use plcurve::{Error, PolyNonlinearity, TimeMap};

#[derive(Parser)]
#[command(
    name = "plcurve",
    version,
    about = "Solution curves of the 1-D p-Laplace Dirichlet problem"
)]
struct Cli {
    /// Problem description (TOML).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the sign, growth and energy hypotheses on f.
    Check,
    /// Sweep amplitudes and write the solution curve as CSV.
    Curve {
        #[arg(long)]
        alpha_min: f64,
        #[arg(long)]
        alpha_max: f64,
        #[arg(long, short, default_value_t = 50)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Profile grid for the linearized mode at each point.
        #[arg(long, default_value_t = 1001)]
        grid: usize,
    },
    /// Solve at one amplitude; profile CSV to --out, summary JSON on stdout.
    Solve {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Method::Timemap)]
        method: Method,
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test the even linearized mode for a zero at x = 1.
    Diagnose {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 2001)]
        grid: usize,
        /// Exit with status 2 unless the solution is non-singular.
        #[arg(long)]
        require_nonsingular: bool,
    },
    /// Evaluate the quantities of the non-singularity argument.
    Invariants {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 2001)]
        grid: usize,
        #[arg(long)]
        require_nonsingular: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Timemap,
    Shoot,
}

/// Exit status 1: usage, configuration or I/O.
struct UsageError(String);

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

#[derive(Serialize)]
struct SolveSummary {
    lambda: f64,
    x0: Option<f64>,
    /// First zero of the `lambda = 1` solution, `lambda^(1/p)`.
    b: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| UsageError(e.to_string()))?;
    }
    let path = cli
        .config
        .ok_or_else(|| UsageError("--config is required".into()))?;
    let cfg = load_config(&path)?;
    let e = cfg
        .exponent()
        .map_err(|err| UsageError(format!("{}: {err}", path.display())))?;
    let nl = cfg
        .nonlinearity()
        .map_err(|err| UsageError(format!("{}: {err}", path.display())))?;
    let tm = TimeMap::new(&nl, e).with_rel_tol(cfg.tolerances.quad_rel_tol);

    match cli.command {
        Command::Check => {
            let report = nl.check_hypotheses(&e, cfg.u_max())?;
            print_json(&report);
            Ok(if report.all_ok() { 0 } else { 2 })
        }
        Command::Curve {
            alpha_min,
            alpha_max,
            n,
            out,
            svg,
            grid,
        } => {
            if !(alpha_min <= alpha_max) || n == 0 {
                return Err(UsageError("need alpha_min <= alpha_max and n >= 1".into()).into());
            }
            let mut curve = tm.trace_curve(alpha_min, alpha_max, n);
            annotate_curve(&nl, &e, &mut curve, &cfg.diagnose_options(grid));
            write_file(&out, &curve_csv(&curve))?;
            if let Some(svg) = svg {
                write_file(&svg, &curve_svg(&curve))?;
            }
            eprintln!(
                "{} admissible, {} rejected",
                curve.points.len(),
                curve.rejected.len()
            );
            Ok(0)
        }
        Command::Solve {
            alpha,
            method,
            grid,
            out,
        } => {
            require_admissible(&tm, alpha)?;
            let profile = match method {
                Method::Timemap => tm.reconstruct_profile(alpha, grid)?,
                Method::Shoot => {
                    let opts = plcurve::shooting::ShootOptions {
                        grid,
                        ..cfg.shoot_options()
                    };
                    shoot_and_scale(&nl, &e, alpha, &opts)?.profile
                }
            };
            if let Some(out) = out {
                write_file(&out, &profile_csv(&profile))?;
            }
            print_json(&SolveSummary {
                lambda: profile.lambda,
                x0: profile.x0,
                b: profile.lambda.powf(1.0 / e.p()),
            });
            Ok(0)
        }
        Command::Diagnose {
            alpha,
            grid,
            require_nonsingular,
        } => {
            require_admissible(&tm, alpha)?;
            let d = diagnose(&nl, &e, alpha, &cfg.diagnose_options(grid))?;
            print_json(&d);
            Ok(verdict_code(d.verdict_nonsingular, require_nonsingular))
        }
        Command::Invariants {
            alpha,
            grid,
            require_nonsingular,
        } => {
            require_admissible(&tm, alpha)?;
            let r = invariant_report(&nl, &e, alpha, &cfg.diagnose_options(grid))?;
            print_json(&r);
            Ok(verdict_code(r.verdict_nonsingular, require_nonsingular))
        }
    }
}

fn load_config(path: &Path) -> Result<ProblemConfig, UsageError> {
    let text = fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    ProblemConfig::from_toml(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), UsageError> {
    fs::write(path, contents)
        .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))
}

fn require_admissible(tm: &TimeMap<'_, PolyNonlinearity>, alpha: f64) -> Result<(), Error> {
    match tm.is_admissible(alpha).reason {
        Some(reason) => Err(Error::Inadmissible { alpha, reason }),
        None => Ok(()),
    }
}

fn verdict_code(nonsingular: bool, required: bool) -> u8 {
    if required && !nonsingular {
        eprintln!("singular-suspect: w(1) is indistinguishable from zero");
        2
    } else {
        0
    }
}

fn print_json<T: Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    // a closed pipe downstream is not our failure
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}
