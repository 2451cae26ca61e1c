use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use outbreak_local::epidemic::{SuccessRule, TransmissionParams};
use outbreak_local::generators::{DegreeSpec, GenSpec};
use outbreak_local::graph::ExpansionMode;
use outbreak_local::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Parser)]
#[command(name = "outbreak-local", version, about = "Local estimation of epidemic outbreaks on sparse graphs")]
pub struct Cli {
    /// JSON config: an experiment for `experiment`, otherwise the
    /// subcommand's options by their long names (flags win).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to OUTBREAK_LOCAL_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory; results go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph and write it as an edge list.
    Generate(GenerateArgs),
    /// Giant-component fraction under bond percolation.
    Percolate(PercolateArgs),
    /// Histogram of single-seed outbreak sizes.
    Outbreak(OutbreakArgs),
    /// Local estimator from k-balls around random vertices.
    Estimate(EstimateArgs),
    /// Branching-process survival curve, optionally with a Monte Carlo curve.
    Survival(SurvivalArgs),
    /// Large-set edge or vertex expansion.
    Expansion(ExpansionArgs),
    /// k-bridge counts and the pivotal rate at the root.
    Bridges(BridgesArgs),
    /// Exact outbreak law by enumerating all edge masks.
    Oracle(OracleArgs),
    /// Run an experiment config and write a manifest.
    Experiment,
}

fn parse_degrees(text: &str) -> std::result::Result<DegreeSpec, String> {
    outbreak_local::generators::parse_compact_degrees(text).map_err(|e| e.to_string())?;
    Ok(DegreeSpec::Compact(text.to_string()))
}

/// Parses a lowercase serde enum name, e.g. `edge` or `others_counted`.
fn parse_named<T: DeserializeOwned>(text: &str) -> std::result::Result<T, String> {
    serde_json::from_value(Value::String(text.to_string())).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct GraphArgs {
    /// Edge-list file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// cm, pa, two_block or k_regular.
    #[arg(long)]
    pub model: Option<String>,
    /// Degree list such as `3x100000` or `4x10,2x6`.
    #[arg(long, value_parser = parse_degrees)]
    pub degrees: Option<DegreeSpec>,
    /// Edges per arrival for `pa`.
    #[arg(long)]
    pub m: Option<usize>,
    /// Vertex count for `pa`, `two_block` and `k_regular`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Degree for `two_block` and `k_regular`.
    #[arg(long)]
    pub d: Option<usize>,
    /// Motif table JSON; replaces every vertex of the generated graph.
    #[arg(long)]
    pub motifs: Option<PathBuf>,
    /// Generator seed; derived from the master seed when absent.
    #[arg(long)]
    pub gen_seed: Option<u64>,
    /// Full generator spec, config file only.
    #[arg(skip)]
    pub gen: Option<GenSpec>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ProcessArgs {
    /// Transmission probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// Infection rate; p = lambda / (lambda + 1).
    #[arg(long, conflicts_with = "p")]
    pub lambda: Option<f64>,
}

impl ProcessArgs {
    pub fn params(&self) -> Result<TransmissionParams> {
        match (self.p, self.lambda) {
            (Some(_), Some(_)) => Err(Error::Config("give either --p or --lambda".into())),
            (Some(p), None) => TransmissionParams::from_p(p),
            (None, Some(l)) => TransmissionParams::from_lambda(l),
            (None, None) => Err(Error::Config("missing --p or --lambda".into())),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct PercolateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub p: ProcessArgs,
    /// Percolation trials [default: 10].
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct OutbreakArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub p: ProcessArgs,
    /// Outbreaks to simulate [default: 1000].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Band half-width [default: 0.05].
    #[arg(long)]
    pub delta: Option<f64>,
    /// Reference outbreak size; estimated from the trials when absent.
    #[arg(long)]
    pub zeta_ref: Option<f64>,
    /// Histogram bins [default: 100].
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub p: ProcessArgs,
    /// Ball radius and success threshold [default: 50].
    #[arg(long)]
    pub k: Option<usize>,
    /// Query vertices [default: 2000].
    #[arg(long)]
    pub q: Option<usize>,
    /// seed_counted or others_counted.
    #[arg(long, value_parser = parse_named::<SuccessRule>)]
    pub rule: Option<SuccessRule>,
    /// Draw query vertices proportionally to degree.
    #[arg(long)]
    pub degree_biased: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SurvivalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// `lo:hi:step` or a comma-separated list.
    #[arg(long)]
    pub grid: Option<String>,
    /// Monte Carlo trials per grid point; needs a graph.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ExpansionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Smallest set as a fraction of n [default: 0.1].
    #[arg(long)]
    pub eps: Option<f64>,
    /// edge or vertex.
    #[arg(long, value_parser = parse_named::<ExpansionMode>)]
    pub mode: Option<ExpansionMode>,
    /// Local-search moves for graphs too large to enumerate.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Skip enumeration even on small graphs.
    #[arg(long)]
    pub heuristic: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct BridgesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub p: ProcessArgs,
    /// Root vertex [default: 0].
    #[arg(long)]
    pub root: Option<usize>,
    /// Bridge threshold, required.
    #[arg(long)]
    pub k: Option<usize>,
    /// Mask samples [default: 10000].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Finite-difference step [default: 0.05].
    #[arg(long)]
    pub fd_step: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub p: ProcessArgs,
    /// Single seed vertex.
    #[arg(long)]
    pub vertex: Option<usize>,
    /// Comma-separated seed set.
    #[arg(long, value_delimiter = ',', conflicts_with = "vertex")]
    pub seeds: Option<Vec<usize>>,
    /// Report the probability of reaching distance k instead of the law.
    #[arg(long)]
    pub k: Option<usize>,
    /// Exact rational p such as `1/2`; prints probabilities as fractions.
    #[arg(long)]
    pub rational: Option<String>,
}

/// Fills options missing from the command line with values from a JSON
/// object; unknown keys are rejected.
fn merge<T: Serialize + DeserializeOwned>(cli: &T, path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    let file: Value = serde_json::from_str(&text)?;
    let Value::Object(mut base) = file else {
        return Err(Error::Config("config must be a JSON object".into()));
    };
    let Value::Object(flags) = serde_json::to_value(cli)? else {
        unreachable!("argument structs serialize to objects")
    };
    if let Some(key) = base.keys().find(|k| !flags.contains_key(*k)) {
        return Err(Error::Config(format!("unknown config key {key:?}")));
    }
    for (key, value) in flags {
        let unset = value.is_null() || value == Value::Bool(false);
        if !unset || !base.contains_key(&key) {
            base.insert(key, value);
        }
    }
    Ok(serde_json::from_value(Value::Object(base))?)
}

impl Cli {
    /// Applies `--config` to the subcommand's options.
    pub fn with_config(mut self) -> Result<Cli> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        self.command = match &self.command {
            Command::Generate(a) => Command::Generate(merge(a, &path)?),
            Command::Percolate(a) => Command::Percolate(merge(a, &path)?),
            Command::Outbreak(a) => Command::Outbreak(merge(a, &path)?),
            Command::Estimate(a) => Command::Estimate(merge(a, &path)?),
            Command::Survival(a) => Command::Survival(merge(a, &path)?),
            Command::Expansion(a) => Command::Expansion(merge(a, &path)?),
            Command::Bridges(a) => Command::Bridges(merge(a, &path)?),
            Command::Oracle(a) => Command::Oracle(merge(a, &path)?),
            Command::Experiment => Command::Experiment,
        };
        Ok(self)
    }

    /// Subcommand name and its resolved options, for the provenance hash.
    pub fn command_params(&self) -> Result<(&'static str, Value)> {
        Ok(match &self.command {
            Command::Generate(a) => ("generate", serde_json::to_value(a)?),
            Command::Percolate(a) => ("percolate", serde_json::to_value(a)?),
            Command::Outbreak(a) => ("outbreak", serde_json::to_value(a)?),
            Command::Estimate(a) => ("estimate", serde_json::to_value(a)?),
            Command::Survival(a) => ("survival", serde_json::to_value(a)?),
            Command::Expansion(a) => ("expansion", serde_json::to_value(a)?),
            Command::Bridges(a) => ("bridges", serde_json::to_value(a)?),
            Command::Oracle(a) => ("oracle", serde_json::to_value(a)?),
            Command::Experiment => ("experiment", Value::Null),
        })
    }
}

/// `lo:hi:step` (inclusive of `hi` up to rounding) or `a,b,c`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("bad grid {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let nums: Vec<f64> = parts
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let (lo, hi, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || hi < lo {
            return Err(bad());
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        // round to 12 places so 0.1 * 3 prints as 0.3
        return Ok((0..=count)
            .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
            .collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

/// `a/b` or an integer.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    text.trim()
        .parse::<BigRational>()
        .map_err(|_| Error::InvalidParameter(format!("bad rational {text:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.1:0.5:0.1").unwrap(), [0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(parse_grid("0.5,0.7").unwrap(), [0.5, 0.7]);
        assert!(parse_grid("0.5:0.1:0.1").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/2").unwrap().to_string(), "1/2");
        assert!(parse_rational("half").is_err());
    }

    #[test]
    fn config_merge_prefers_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"k": 10, "q": 50, "p": 0.4, "model": "k_regular"}"#).unwrap();
        let flags = EstimateArgs {
            k: Some(20),
            ..EstimateArgs::default()
        };
        let merged = merge(&flags, &path).unwrap();
        assert_eq!((merged.k, merged.q, merged.p.p), (Some(20), Some(50), Some(0.4)));
        assert_eq!(merged.graph.model.as_deref(), Some("k_regular"));
        std::fs::write(&path, r#"{"kk": 1}"#).unwrap();
        assert!(merge(&flags, &path).is_err());
    }
}
