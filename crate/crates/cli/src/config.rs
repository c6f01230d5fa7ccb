//! Run configuration: command-line flags layered over an optional JSON file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use smoothk::{AlphaSequence, Family, SequenceSpec};

use crate::exit::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Standard,
    Extended,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Sequence family
    #[arg(long, global = true, value_parser = parse_family)]
    pub case: Option<Family>,
    /// Ratio for cases B and C, in (0, 1)
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Exponent for case A, positive
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Number of arcs to build
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Index interval as n0:n1
    #[arg(long, global = true, value_parser = parse_range)]
    pub range: Option<[usize; 2]>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output formats, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
    #[arg(long, global = true, value_enum)]
    pub precision: Option<Precision>,
    /// JSON file with any of the settings above; flags win on conflict
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run sweeps on one thread
    #[arg(long, global = true)]
    pub sequential: bool,
}

/// Settings read from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    case: Option<Family>,
    lambda: Option<f64>,
    q: Option<f64>,
    depth: Option<usize>,
    range: Option<[usize; 2]>,
    output: Option<PathBuf>,
    formats: Option<Vec<Format>>,
    precision_mode: Option<Precision>,
}

/// Fully resolved settings, embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(flatten)]
    pub sequence: SequenceSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<[usize; 2]>,
    pub output: PathBuf,
    pub formats: Vec<Format>,
    pub precision_mode: Precision,
    #[serde(skip)]
    pub sequential: bool,
}

impl RunConfig {
    pub fn resolve(command: &'static str, args: &GlobalArgs, default_formats: &[Format]) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let case = args.case.or(file.case).ok_or_else(|| CliError::usage("no case given; use --case A|B|C"))?;
        // a parameter from the file is dropped when the flags switch case
        let same_case = file.case.is_none_or(|c| c == case);
        let lambda = args.lambda.or(file.lambda.filter(|_| same_case));
        let q = args.q.or(file.q.filter(|_| same_case));
        let sequence = match case {
            Family::A => {
                if lambda.is_some() {
                    return Err(CliError::usage("--lambda applies to cases B and C"));
                }
                SequenceSpec::a(q.unwrap_or(1.0))
            }
            Family::B | Family::C => {
                if q.is_some() {
                    return Err(CliError::usage("--q applies to case A"));
                }
                let default = if case == Family::B { 0.5 } else { 0.4 };
                SequenceSpec { case, lambda: Some(lambda.unwrap_or(default)), q: None }
            }
        };
        let precision_mode = args.precision.or(file.precision_mode).unwrap_or_default();
        if precision_mode == Precision::Extended {
            return Err(CliError::usage("extended precision is not available; use --precision standard"));
        }
        let mut formats = args.format.clone().or(file.formats).unwrap_or_else(|| default_formats.to_vec());
        formats.sort();
        formats.dedup();
        Ok(Self {
            command,
            sequence,
            depth: args.depth.or(file.depth),
            range: args.range.or(file.range),
            output: args.out.clone().or(file.output).unwrap_or_else(|| PathBuf::from(".")),
            formats,
            precision_mode,
            sequential: args.sequential,
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn exec(&self) -> smoothk::Execution {
        if self.sequential {
            smoothk::Execution::Sequential
        } else {
            smoothk::Execution::Parallel
        }
    }

    pub fn sequence(&self) -> Result<AlphaSequence, CliError> {
        Ok(AlphaSequence::new(self.sequence)?)
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("malformed config {}: {e}", path.display())))
}

pub fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

pub fn parse_range(s: &str) -> Result<[usize; 2], String> {
    let (a, b) = s.split_once(':').ok_or("expected n0:n1")?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("{t:?} is not an index"));
    let range = [parse(a)?, parse(b)?];
    if range[1] < range[0] {
        return Err("empty range".into());
    }
    Ok(range)
}

pub fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected X,Y")?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("{t:?} is not a number"));
    let p = [parse(a)?, parse(b)?];
    if !p.iter().all(|v| v.is_finite()) {
        return Err("coordinates must be finite".into());
    }
    Ok(p)
}
