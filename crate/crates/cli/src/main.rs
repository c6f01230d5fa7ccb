//! `smoothk`: build the smooth convex set, project onto it and run the
//! numeric verifiers from the command line.
//!
//! Exit codes: 0 pass, 2 construction condition fails, 3 verifier fails,
//! 64 usage, 65 depth guard, 70 internal error, 74 I/O.

mod commands;
mod config;
mod exit;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use smoothk::LemmaId;

use config::{Format, GlobalArgs, RunConfig};
use exit::CliError;

#[derive(Debug, Parser)]
#[command(name = "smoothk", version, about = "Smooth convex set with a non-differentiable metric projection")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the construction condition on the angle sequence
    Validate,
    /// Write the boundary as JSON and SVG, annotating indices in --range
    Construct,
    /// Project one point onto the set
    Project {
        /// Query point as X,Y
        #[arg(long, value_parser = config::parse_point, allow_hyphen_values = true)]
        point: [f64; 2],
    },
    /// Run one numeric verifier
    Verify {
        /// radius-limit, radius-gap, smoothness, circle-tangent, chord-speed,
        /// asymptotic-helpers, arc-speed, weighted-mean, nonexistence or nonexpansive
        #[arg(long, value_parser = parse_lemma)]
        lemma: LemmaId,
        /// Override the default tolerance of the verifier
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Sample the difference quotient D(theta) on a grid
    Quotients {
        /// dyadic:k0:k1, tn:n0:n1, sn:n0:n1 or ts:n0:n1
        #[arg(long)]
        grid: Option<String>,
    },
}

fn parse_lemma(s: &str) -> Result<LemmaId, String> {
    s.parse().map_err(|e: smoothk::Error| e.to_string())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let g = &cli.global;
    match cli.command {
        Command::Validate => commands::validate(&RunConfig::resolve("validate", g, &[])?),
        Command::Construct => {
            commands::construct(&mut RunConfig::resolve("construct", g, &[Format::Json, Format::Svg])?)
        }
        Command::Project { point } => commands::project(&mut RunConfig::resolve("project", g, &[])?, point),
        Command::Verify { lemma, tolerance } => {
            if tolerance.is_some_and(|t| t.is_nan() || t < 0.0) {
                return Err(CliError::usage("--tolerance must be nonnegative"));
            }
            commands::verify(&mut RunConfig::resolve("verify", g, &[Format::Json])?, lemma, tolerance)
        }
        Command::Quotients { grid } => {
            commands::quotients(&mut RunConfig::resolve("quotients", g, &[Format::Csv, Format::Svg])?, grid.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
