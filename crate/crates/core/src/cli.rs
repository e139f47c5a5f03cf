//! Command-line front end. Every structured output is JSON on stdout; the
//! scan table is the only CSV.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::generators::{flat_admissible_problem, flat_problem, random_problem, static_constant_curvature_problem, PChoice};
use crate::index_form::{index_and_nullity, SpaceKind};
use crate::jacobi::{focal_instants, FocalReport, DEFAULT_T_LO};
use crate::problem::MorseSturmProblem;
use crate::pseudo::pseudo_focal_instants;
use crate::scan::{scan, verify, Degeneracy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_REGIME: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;
/// Numerical failure (step count too small, empty kernel, exhausted search).
pub const EXIT_NUMERICAL: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "morse-sturm", version, about = "Focal points and Morse index of Lorentzian Morse-Sturm systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the validation report; exit 1 when the problem is invalid.
    Validate {
        #[arg(long)]
        problem: PathBuf,
    },
    /// Focal instants of the P-Jacobi fields.
    Focal {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = DEFAULT_T_LO)]
        tlo: f64,
    },
    /// Pseudo-focal instants.
    PseudoFocal {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = DEFAULT_T_LO)]
        tlo: f64,
    },
    /// Index and nullity of the index form at one value of sigma.
    Index {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 128)]
        mesh: usize,
        #[arg(long, value_enum, default_value_t = Space::H0)]
        space: Space,
    },
    /// Sweep sigma over [0.01, 1]: CSV table to --out, JSON summary to stdout.
    Scan {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long, default_value_t = 128)]
        mesh: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the index identities; exit 4 when an asserted check fails.
    Verify {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long, default_value_t = 128)]
        mesh: usize,
    },
    /// Write one of the built-in problems to a file.
    Example {
        #[arg(value_enum)]
        name: ExampleName,
        /// Curvature of the static sphere.
        #[arg(long, default_value_t = 22.207)]
        k: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = 20.0)]
        norm_bound: f64,
        /// Dimension of the flat problem.
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Number of spacelike directions spanning P in the flat problem.
        #[arg(long, default_value_t = 0)]
        p_dim: usize,
        #[arg(long)]
        emit: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Space {
    H0,
    Hstar,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExampleName {
    Flat,
    StaticSphere,
    FlatAdmissible,
    Random,
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    csv: String,
    grid_size: usize,
    mesh_size: usize,
    mu_at_one: usize,
    mu0_at_one: usize,
    nullity0_at_one: usize,
    focal: &'a FocalReport,
    pseudo_focal: &'a FocalReport,
    degeneracies: &'a [Degeneracy],
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Dimension { .. } | Error::Schema(_) | Error::NotSymmetric(_) | Error::Io(_) | Error::Json(_) => EXIT_SCHEMA,
        Error::Regime(_) | Error::NotTimelike { .. } | Error::TimelikeGeodesic | Error::NotSpacelike(_) => EXIT_REGIME,
        Error::SearchExhausted(_)
        | Error::EmptyKernel { .. }
        | Error::StepCountTooSmall { .. }
        | Error::Discretization(_) => EXIT_NUMERICAL,
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Error> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Error> {
    match command {
        Command::Validate { problem } => {
            let report = MorseSturmProblem::load(problem)?.validate();
            print_json(out, &report)?;
            Ok(if report.valid { EXIT_OK } else { EXIT_USAGE })
        }
        Command::Focal { problem, tlo } => {
            print_json(out, &focal_instants(&MorseSturmProblem::load(problem)?, tlo)?)?;
            Ok(EXIT_OK)
        }
        Command::PseudoFocal { problem, tlo } => {
            print_json(out, &pseudo_focal_instants(&MorseSturmProblem::load(problem)?, tlo)?)?;
            Ok(EXIT_OK)
        }
        Command::Index { problem, sigma, mesh, space } => {
            let kind = match space {
                Space::H0 => SpaceKind::H0,
                Space::Hstar => SpaceKind::HStar,
            };
            print_json(out, &index_and_nullity(&MorseSturmProblem::load(problem)?, sigma, mesh, kind)?)?;
            Ok(EXIT_OK)
        }
        Command::Scan { problem, grid, mesh, out: csv } => {
            let sc = scan(&MorseSturmProblem::load(problem)?, grid, mesh)?;
            std::fs::write(&csv, sc.to_csv())?;
            let last = sc.grid.len() - 1;
            print_json(
                out,
                &ScanSummary {
                    csv: csv.display().to_string(),
                    grid_size: sc.grid.len(),
                    mesh_size: sc.mesh_size,
                    mu_at_one: sc.mu[last],
                    mu0_at_one: sc.mu0[last],
                    nullity0_at_one: sc.nullity0[last],
                    focal: &sc.focal,
                    pseudo_focal: &sc.pseudo_focal,
                    degeneracies: &sc.degeneracies,
                },
            )?;
            Ok(EXIT_OK)
        }
        Command::Verify { problem, grid, mesh } => {
            let report = verify(&MorseSturmProblem::load(problem)?, grid, mesh)?;
            print_json(out, &report)?;
            Ok(if report.all_pass { EXIT_OK } else { EXIT_VERIFICATION })
        }
        Command::Example { name, k, seed, degree, norm_bound, n, p_dim, emit } => {
            let problem = match name {
                ExampleName::Flat => {
                    if n < 2 || p_dim >= n {
                        return Err(Error::Schema(format!("flat problem needs n >= 2 and p-dim < n, got n = {n}, p-dim = {p_dim}")));
                    }
                    flat_problem(n, if p_dim == 0 { PChoice::Point } else { PChoice::Spacelike(p_dim) })
                }
                ExampleName::StaticSphere => {
                    if !(k > 0.0) {
                        return Err(Error::Schema(format!("curvature must be positive, got {k}")));
                    }
                    static_constant_curvature_problem(k)
                }
                ExampleName::FlatAdmissible => flat_admissible_problem(),
                ExampleName::Random => random_problem(seed, degree, norm_bound)?,
            };
            problem.save(&emit)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `argv` (program name first), runs the command writing to `out`
/// and returns the process exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(argv, &mut lock)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = run_with(std::iter::once("morse-sturm").chain(args.iter().copied()), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["index", "--problem", "x.json", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_file_is_schema_error() {
        assert_eq!(run_capture(&["validate", "--problem", "/nonexistent/p.json"]).0, EXIT_SCHEMA);
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::Regime("x".into())), EXIT_REGIME);
        assert_eq!(exit_code(&Error::Schema("x".into())), EXIT_SCHEMA);
        assert_eq!(exit_code(&Error::EmptyKernel { sigma: 1.0 }), EXIT_NUMERICAL);
    }
}
