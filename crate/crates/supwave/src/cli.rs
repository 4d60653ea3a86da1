//! Command-line surface and the merge of flags, environment and config file.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{from_toml, validate, LawName, Parsed, RunConfig};
use crate::error::CliError;

/// Output directory used when neither flag, environment nor config sets one.
pub const DEFAULT_OUTPUT_DIR: &str = "supwave-out";
pub const OUTPUT_DIR_ENV: &str = "SUPWAVE_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "supwave", version, about = "Pseudospectral experiments for the defocusing wave equation on T^3 with randomized data")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags that override configuration keys.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Final time.
    #[arg(long = "T", global = true, value_name = "T")]
    pub horizon: Option<f64>,
    #[arg(long, global = true)]
    pub dt_max: Option<f64>,
    /// Comma-separated truncation levels.
    #[arg(long = "N", global = true, value_name = "N,...", value_delimiter = ',')]
    pub truncations: Option<Vec<f64>>,
    #[arg(long, global = true, value_parser = parse_law)]
    pub law: Option<LawName>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Worker threads for ensembles; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, global = true, env = OUTPUT_DIR_ENV, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
}

fn parse_law(text: &str) -> Result<LawName, String> {
    LawName::parse(text).ok_or_else(|| format!("unknown law {text:?} (expected gaussian, rademacher or uniform)"))
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Draw randomized data; writes a norm table and one snapshot.
    Randomize {
        /// Sample index whose pair is written as a snapshot.
        #[arg(long, default_value_t = 0)]
        sample: u64,
    },
    /// Solve the remainder equation for one randomized sample.
    Evolve {
        #[arg(long, default_value_t = 0)]
        sample: u64,
        /// Truncate the forcing data to |n| <= N.
        #[arg(long)]
        truncation: Option<f64>,
        /// Steps between recorded rows.
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        /// Use the deterministic data without randomizing it.
        #[arg(long)]
        deterministic: bool,
    },
    /// Monte Carlo ensembles over the truncation levels.
    Ensemble {
        #[arg(long, value_enum, default_value_t = Experiment::Energy)]
        experiment: Experiment,
        /// Steps between energy samples in the sup over time.
        #[arg(long, default_value_t = 1)]
        record_every: usize,
    },
    /// Littlewood-Paley, Bernstein and Parseval invariants on random fields.
    LpCheck,
    /// Decay of the truncation error in N.
    Converge {
        /// Skip the nonlinear continuation runs.
        #[arg(long)]
        linear_only: bool,
        /// Also measure the linear error in the Strichartz norm.
        #[arg(long)]
        strichartz: bool,
        #[arg(long, default_value_t = 5)]
        time_samples: usize,
    },
    /// Tail probabilities of a space-time norm of the free evolution.
    Tail {
        #[arg(long, value_enum, default_value_t = FlowName::S)]
        flow: FlowName,
        /// Time exponent; `inf` for the supremum.
        #[arg(long, default_value_t = 8.0)]
        q: f64,
        /// Space exponent; `inf` for the supremum.
        #[arg(long, default_value_t = 8.0)]
        r: f64,
        #[arg(long, default_value_t = 9)]
        time_samples: usize,
        /// Use the window [T, T+1] with the long-time normalization.
        #[arg(long)]
        long_time: bool,
        /// Derivative order applied before the norm.
        #[arg(long, default_value_t = 0.0)]
        derivative: f64,
        #[arg(long, default_value_t = 40)]
        lambda_points: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Energy,
    Events,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlowName {
    S,
    #[value(name = "s-tilde")]
    STilde,
}

/// Configuration after merging, with its destination.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub parsed: Parsed,
    pub output_dir: PathBuf,
    pub workers: usize,
}

/// Merges flag > environment > config file > default and validates.
pub fn resolve(overrides: &Overrides) -> Result<Resolved, CliError> {
    let text = match &overrides.config {
        Some(path) => Some(fs::read_to_string(path).map_err(|e| CliError::io(path, e))?),
        None => None,
    };
    let mut config = match (&text, overrides.p) {
        (Some(t), _) => from_toml(t)?,
        (None, Some(p)) => RunConfig::with_exponent(p),
        (None, None) => return Err(CliError::Usage("p is required: pass --p or a --config file".into())),
    };
    apply(&mut config, overrides);
    let parsed = validate(config, text.as_deref())?;
    let output_dir = overrides
        .output_dir
        .clone()
        .or_else(|| parsed.config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    if overrides.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    Ok(Resolved { parsed, output_dir, workers: overrides.workers })
}

fn apply(config: &mut RunConfig, o: &Overrides) {
    if let Some(v) = o.p {
        config.p = v;
    }
    if let Some(v) = o.s {
        config.s = v;
    }
    if let Some(v) = o.seed {
        config.seed = v;
    }
    if let Some(v) = o.resolution {
        config.resolution = v;
    }
    if let Some(v) = o.horizon {
        config.horizon = v;
    }
    if o.dt_max.is_some() {
        config.dt_max = o.dt_max;
    }
    if let Some(v) = &o.truncations {
        config.truncations = v.clone();
    }
    if let Some(v) = o.law {
        config.law = v;
    }
    if let Some(v) = o.samples {
        config.samples = v;
    }
}
