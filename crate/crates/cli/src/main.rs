//! `kummer-secant`: theta values, Kummer points, secant checks and the
//! formal hierarchy from the command line.
//!
//! Exit status: 0 on success, 1 on bad input, 2 when a numerical tolerance
//! is not met (the report is still written).

// `!(x <= tol)` is deliberate: NaN must fail the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kummer_secant::Lift;

#[derive(Parser, Debug)]
#[command(name = "kummer-secant", about, long_about = None)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Period matrix JSON file: {"g", "tau_re", "tau_im"}
    #[arg(long, global = true, value_name = "PATH")]
    pub tau: Option<PathBuf>,
    /// Input JSON file for the command
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Truncation tolerance of theta sums, relative to the Gaussian scale of
    /// the argument (absolute for reduced arguments)
    #[arg(long, global = true, value_name = "X", default_value_t = 1e-12)]
    pub eps: f64,
    /// Acceptance tolerance for residuals
    #[arg(long, global = true, value_name = "X", default_value_t = 1e-8)]
    pub tol: f64,
    /// Seed for every random choice
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    /// Number of random sample points
    #[arg(long, global = true, value_name = "N", default_value_t = 64)]
    pub samples: usize,
    /// Hierarchy order
    #[arg(long, global = true, value_name = "N", default_value_t = 4)]
    pub order: usize,
    /// Half-period lift as 2g bits, e.g. 0110
    #[arg(long, global = true, value_name = "BITS")]
    pub lift: Option<Lift>,
    /// Output JSON path (stdout when absent); tables go to the same path with
    /// a .csv extension
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum Command {
    /// Theta values at the --input points (or --samples random points)
    Theta,
    /// Kummer images of the --input points (or --samples random points)
    Kummer,
    /// Secant residual, coefficients and bilinear residual of a configuration
    SecantCheck,
    /// Nelder-Mead search over zeta for a secant through the input points
    SecantSearch,
    /// Propagate a secant by the b-point construction and test every lift
    SecantPropagate,
    /// Check the quadrisecant involution identity
    Involution,
    /// Solve the hierarchy from a degenerate seed up to --order
    HierarchyRun,
    /// Check the tangency premises of a degenerate seed
    PremiseCheck,
    /// Build a Fay trisecant from four random points of the theta divisor
    ScenarioFay,
    /// Build a degenerate (tangent) trisecant seed for the hierarchy
    ScenarioDegenerate,
}

/// Why a run did not succeed; tolerance failures carry the report.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Tolerance(String, Option<io::Report>),
}

impl Failure {
    pub fn input(msg: String) -> Self {
        Failure::Input(msg)
    }
}

impl From<kummer_secant::Error> for Failure {
    fn from(e: kummer_secant::Error) -> Self {
        if e.is_tolerance_failure() {
            Failure::Tolerance(e.to_string(), None)
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn validate(opts: &Options) -> Result<(), Failure> {
    if !(opts.eps > 0.0) || !(opts.eps < opts.tol) {
        return Err(Failure::input(format!(
            "need 0 < eps < tol, got eps = {:e}, tol = {:e}",
            opts.eps, opts.tol
        )));
    }
    if opts.order > kummer_secant::theta::MAX_DERIVATIVE_ORDER {
        return Err(Failure::input(format!(
            "order {} exceeds {}",
            opts.order,
            kummer_secant::theta::MAX_DERIVATIVE_ORDER
        )));
    }
    if opts.samples == 0 {
        return Err(Failure::input("samples must be at least 1".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            // usage errors are input errors; 2 is reserved for tolerances
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = validate(&cli.opts).and_then(|_| commands::run(cli.command, &cli.opts));
    let output = cli.opts.output.as_deref();
    match result {
        Ok(report) => match io::write_report(&report, output) {
            Ok(()) => ExitCode::SUCCESS,
            Err(Failure::Input(msg)) | Err(Failure::Tolerance(msg, _)) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Tolerance(msg, report)) => {
            eprintln!("tolerance not met: {msg}");
            if let Some(report) = report {
                if let Err(Failure::Input(m)) | Err(Failure::Tolerance(m, _)) = io::write_report(&report, output) {
                    eprintln!("error: {m}");
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(2)
        }
    }
}
