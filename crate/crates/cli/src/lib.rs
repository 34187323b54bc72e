//! Command-line front end: geometry files in, aligned tables or machine
//! readable reports out.

pub mod document;
pub mod render;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rrp3ss::oracle::multistart;
use rrp3ss::tricept::solve_type1;
use rrp3ss::{solve, solve_type2, Error, OracleGrid, PoseParams, SolveOptions};

use crate::document::{load, Instance};
use crate::render::{CheckReport, ConfigurationRecord, OracleReport, SolveReport, TriceptReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_NOT_SUPPORTED: u8 = 3;
pub const EXIT_CHECK_FAILED: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "rrp3ss", version, about = "Assembly configurations of RRP-3(SS) structures and type-II Tricepts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Geometry file (TOML).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Omit complex values from the output.
    #[arg(long)]
    pub real_only: bool,
    /// Relative imaginary-part threshold below which a root counts as real.
    #[arg(long, default_value_t = 1e-7)]
    pub tol_real: f64,
    /// Report back-substituted configurations without Newton refinement.
    #[arg(long)]
    pub no_refine: bool,
    /// Print elimination and root-finding diagnostics to stderr.
    #[arg(long, short)]
    pub verbose: bool,
}

impl SolveArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            tol_real: self.tol_real,
            refine: !self.no_refine,
            ..SolveOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Geometry file (TOML).
    pub input: PathBuf,
    /// First revolute angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub theta1: f64,
    /// Second revolute angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub theta2: f64,
    /// Prismatic displacement.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: f64,
    /// Largest accepted |‖B − A‖ − L| per leg.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Geometry file (TOML).
    pub input: PathBuf,
    /// Seed grid as `N1xN2xM`: angle samples per axis and σ samples.
    #[arg(long, value_parser = parse_seed_grid)]
    pub seed_grid: Option<(usize, usize, usize)>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a general structure: resultant roots and real configurations.
    Solve(SolveArgs),
    /// Solve a type-II Tricept through the polynomial in σ².
    Tricept(SolveArgs),
    /// Check leg lengths at a given pose.
    Check(CheckArgs),
    /// Find real configurations by multistart Newton, independently of the
    /// elimination.
    Oracle(OracleArgs),
}

pub fn parse_seed_grid(text: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = text.split(['x', 'X']).collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("expected N1xN2xM, got `{text}`"));
    };
    let n = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("`{s}`: {e}"));
    let grid = (n(a)?, n(b)?, n(c)?);
    if grid.0 < 2 || grid.1 < 2 || grid.2 < 2 {
        return Err("every seed-grid dimension must be at least 2".into());
    }
    Ok(grid)
}

/// Text destined for stdout and stderr plus the process exit code.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            ..Self::default()
        }
    }

    fn fail(code: u8, message: impl std::fmt::Display) -> Self {
        Self {
            stderr: format!("error: {message}\n"),
            code,
            ..Self::default()
        }
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NotSupported(_) => EXIT_NOT_SUPPORTED,
        Error::InvalidGeometry(_) | Error::Precondition(_) | Error::LegIndex(_) => EXIT_INPUT,
        _ => EXIT_SOLVER,
    }
}

fn render<T: serde::Serialize>(
    format: Format,
    report: &T,
    table: impl Fn(&T) -> String,
    csv: impl Fn(&T) -> csv::Result<String>,
) -> Outcome {
    match format {
        Format::Table => Outcome::ok(table(report)),
        Format::Json => match serde_json::to_string_pretty(report) {
            Ok(s) => Outcome::ok(s + "\n"),
            Err(e) => Outcome::fail(EXIT_INPUT, e),
        },
        Format::Csv => match csv(report) {
            Ok(s) => Outcome::ok(s),
            Err(e) => Outcome::fail(EXIT_INPUT, e),
        },
    }
}

fn diagnostics(set: &rrp3ss::SolutionSet) -> String {
    let d = &set.diagnostics;
    let mut out = format!(
        "collapse ratios {:?}\naliasing ratio {:.3e}\nholdout error {:.3e}\n",
        d.collapse_ratios, d.alias_ratio, d.holdout_error
    );
    if d.used_companion_fallback {
        out.push_str("root finder fell back to companion eigenvalues\n");
    }
    for (a, b) in &d.near_multiple_roots {
        out.push_str(&format!("roots {a} and {b} are nearly coincident\n"));
    }
    for (sigma, err) in &d.rejected_roots {
        out.push_str(&format!("root {sigma} rejected: {err}\n"));
    }
    out
}

pub fn cmd_solve(args: &SolveArgs) -> Outcome {
    let instance = match load(&args.input) {
        Ok(i) => i,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let result = match &instance {
        Instance::Tricept1(t) => solve_type1(t, &args.options()),
        other => solve(&other.geometry(), &args.options()),
    };
    let set = match result {
        Ok(s) => s,
        Err(e) => return Outcome::fail(exit_code(&e), e),
    };
    let mut out = render(
        args.format,
        &SolveReport::new(&set, args.real_only),
        render::solve_table,
        render::solve_csv,
    );
    if args.verbose {
        out.stderr.push_str(&diagnostics(&set));
    }
    out
}

pub fn cmd_tricept(args: &SolveArgs) -> Outcome {
    let instance = match load(&args.input) {
        Ok(i) => i,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let result = match &instance {
        Instance::Tricept2(t) => solve_type2(t, &args.options()),
        Instance::Tricept1(t) => solve_type1(t, &args.options()),
        Instance::General(_) => {
            return Outcome::fail(EXIT_INPUT, "the tricept command needs a [tricept2] block");
        }
    };
    let set = match result {
        Ok(s) => s,
        Err(e) => return Outcome::fail(exit_code(&e), e),
    };
    let mut out = render(
        args.format,
        &TriceptReport::new(&set, args.real_only),
        render::tricept_table,
        render::tricept_csv,
    );
    if args.verbose {
        out.stderr.push_str(&diagnostics(&set));
    }
    out
}

pub fn cmd_check(args: &CheckArgs) -> Outcome {
    let geom = match load(&args.input) {
        Ok(i) => i.geometry(),
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let pose = PoseParams::from_degrees(args.theta1, args.theta2, args.sigma);
    if !pose.is_finite() || !args.tol.is_finite() || args.tol < 0.0 {
        return Outcome::fail(EXIT_INPUT, "pose and tolerance must be finite, tolerance non-negative");
    }
    let report = CheckReport::new(&pose, &geom, args.tol);
    let mut out = render(args.format, &report, render::check_table, render::check_csv);
    if out.code == EXIT_OK && !report.pass {
        out.code = EXIT_CHECK_FAILED;
    }
    out
}

pub fn cmd_oracle(args: &OracleArgs) -> Outcome {
    let geom = match load(&args.input) {
        Ok(i) => i.geometry(),
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let mut grid = OracleGrid::for_geometry(&geom);
    if let Some((a, b, c)) = args.seed_grid {
        grid = grid.with_samples(a, b, c);
    }
    let report = OracleReport {
        configurations: multistart(&geom, &grid)
            .iter()
            .map(|p| ConfigurationRecord::from_pose(p, &geom))
            .collect(),
    };
    render(args.format, &report, render::oracle_table, render::oracle_csv)
}

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Tricept(a) => cmd_tricept(a),
        Command::Check(a) => cmd_check(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_grid_parsing() {
        assert_eq!(parse_seed_grid("24x24x21"), Ok((24, 24, 21)));
        assert_eq!(parse_seed_grid("8X8X5"), Ok((8, 8, 5)));
        assert!(parse_seed_grid("24x24").is_err());
        assert!(parse_seed_grid("1x4x4").is_err());
        assert!(parse_seed_grid("ax4x4").is_err());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::SingularGeometry), EXIT_SOLVER);
        assert_eq!(
            exit_code(&Error::CollapseFailure {
                degree: 30,
                ratio: 1.0
            }),
            EXIT_SOLVER
        );
        assert_eq!(exit_code(&Error::NotSupported("x".into())), EXIT_NOT_SUPPORTED);
        assert_eq!(exit_code(&Error::InvalidGeometry("x".into())), EXIT_INPUT);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
