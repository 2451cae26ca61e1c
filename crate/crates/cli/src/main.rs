//! `outbreak-local`: generate graphs, sample percolation and outbreaks, run
//! the local estimator and exact oracles, or a whole experiment config.
//!
//! Exit status is 0 on success, 1 on invalid input, 2 on runtime failure.
//! Errors go to stderr as one JSON object `{"code": .., "message": ..}`.

mod args;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use outbreak_local::epidemic::{
    estimate, estimate_degree_biased, outbreak_histogram, EstimateOptions, HistogramOptions,
};
use outbreak_local::generators::{gen_motif_overlay, GenModel, GenSpec, Generated, MotifDistribution};
use outbreak_local::graph::{
    expansion_exact, expansion_heuristic, read_edge_list, write_edge_list, DegreeSequence,
    EXACT_EXPANSION_CAP,
};
use outbreak_local::harness::{
    hash_json, resolve_threads, run_experiment, with_threads, ArtifactProvenance,
    ExperimentConfig,
};
use num_rational::BigRational;
use outbreak_local::oracle;
use outbreak_local::percolation::{
    giant_fraction, pivotal_bridge_report, survival_curve_analytic, survival_curve_empirical,
    BridgeReport, DegreeLaw,
};
use outbreak_local::seed::task_seed;
use outbreak_local::{Error, Graph, Result};
use serde::Serialize;

use args::{Cli, Command, GraphArgs};

enum Failure {
    Validation(String, String),
    Runtime(String, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        if e.is_validation() {
            Failure::Validation(e.code().into(), e.to_string())
        } else {
            Failure::Runtime(e.code().into(), e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = match cli.with_config() {
        Ok(cli) => cli,
        Err(e) => return report(if e.is_validation() { 1 } else { 2 }, e.code(), &e.to_string()),
    };
    let result = resolve_threads(cli.threads)
        .map_err(Failure::from)
        .and_then(|threads| {
            with_threads(threads, || dispatch(&cli))
                .map_err(Failure::from)
                .and_then(|r| r)
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(code, message)) => report(1, &code, &message),
        Err(Failure::Runtime(code, message)) => report(2, &code, &message),
    }
}

fn report(status: u8, code: &str, message: &str) -> ExitCode {
    let line = serde_json::json!({ "code": code, "message": message });
    eprintln!("{line}");
    ExitCode::from(status)
}

/// Where results go: files under `--out`, or stdout.
struct Sink<'a> {
    out: Option<&'a Path>,
    stamp: ArtifactProvenance,
}

impl Sink<'_> {
    fn emit(&self, file: &str, contents: &str) -> Result<()> {
        match self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(file), contents)?;
                Ok(())
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(contents.as_bytes())?;
                Ok(())
            }
        }
    }

    fn json(&self, file: &str, value: &impl Serialize) -> Result<()> {
        self.emit(file, &self.stamp.stamp_json(value)?)
    }

    fn csv(&self, file: &str, body: &str) -> Result<()> {
        self.emit(file, &self.stamp.stamp_csv(body))
    }
}

fn dispatch(cli: &Cli) -> std::result::Result<(), Failure> {
    let master = cli.seed.unwrap_or(0);
    let out = cli.out.as_deref();
    if let Command::Experiment = cli.command {
        return experiment(cli);
    }
    let (name, params) = cli.command_params()?;
    let hash = hash_json(&serde_json::json!({ "command": name, "seed": master, "args": params }))?;
    let seed = task_seed(master, name);
    let sink = Sink {
        out,
        stamp: ArtifactProvenance::new(&hash, seed, name),
    };
    match &cli.command {
        Command::Generate(a) => {
            let generated = a.graph.load(master)?;
            let mut text = sink.stamp.csv_comment();
            text.push_str(&format!(
                "# model={} erased={} attempts={}\n",
                generated.provenance.model, generated.provenance.erased, generated.provenance.attempts
            ));
            let mut body = Vec::new();
            write_edge_list(&generated.graph, &mut body)?;
            text.push_str(&String::from_utf8(body).expect("edge list is utf-8"));
            sink.emit("graph.edges", &text)?;
        }
        Command::Percolate(a) => {
            let g = a.graph.load(master)?.graph;
            let summary = giant_fraction(&g, a.p.params()?.p, a.trials.unwrap_or(10), seed)?;
            sink.csv("giant.csv", &summary.to_csv())?;
            if out.is_some() {
                let result = serde_json::json!({ "p": summary.p, "estimate": summary.estimate });
                sink.json("giant.json", &result)?;
            }
        }
        Command::Outbreak(a) => {
            let g = a.graph.load(master)?.graph;
            let options = HistogramOptions {
                delta: a.delta.unwrap_or(0.05),
                zeta_ref: a.zeta_ref,
                bins: a.bins.unwrap_or(100),
            };
            let hist = outbreak_histogram(&g, a.trials.unwrap_or(1000), a.p.params()?, seed, options)?;
            if out.is_some() {
                sink.csv("histogram.csv", &hist.to_csv())?;
            }
            sink.json("histogram.json", &hist)?;
        }
        Command::Estimate(a) => {
            let g = a.graph.load(master)?.graph;
            let options = EstimateOptions {
                rule: a.rule.unwrap_or_default(),
                ..EstimateOptions::default()
            };
            let (k, q) = (a.k.unwrap_or(50), a.q.unwrap_or(2000));
            let report = if a.degree_biased {
                estimate_degree_biased(&g, k, q, a.p.params()?, seed, options)?
            } else {
                estimate(&g, k, q, a.p.params()?, seed, options)?
            };
            if out.is_some() {
                sink.csv("queries.csv", &report.queries_csv())?;
            }
            sink.json("estimate.json", &report)?;
        }
        Command::Survival(a) => {
            let grid = args::parse_grid(a.grid.as_deref().unwrap_or("0:1:0.05"))?;
            // bare --degrees describes the limit law; otherwise use the graph's degrees
            let law = match (&a.graph.degrees, a.graph.is_given()) {
                (Some(spec), false) => DegreeLaw::from_sequence(&spec.sequence()?)?,
                (_, true) => {
                    DegreeLaw::from_sequence(&DegreeSequence::new(a.graph.load(master)?.graph.degrees()))?
                }
                (None, false) => {
                    return Err(Error::Config("survival needs --degrees or a graph".into()).into())
                }
            };
            sink.csv("survival_analytic.csv", &survival_curve_analytic(&law, &grid)?.to_csv())?;
            if let Some(trials) = a.trials {
                let g = a.graph.load(master)?.graph;
                let curve = survival_curve_empirical(&g, &grid, trials, seed)?;
                sink.csv("survival_empirical.csv", &curve.to_csv())?;
            }
        }
        Command::Expansion(a) => {
            let g = a.graph.load(master)?.graph;
            let eps = a.eps.unwrap_or(0.1);
            let mode = a.mode.unwrap_or(outbreak_local::graph::ExpansionMode::Edge);
            let report = if g.n() <= EXACT_EXPANSION_CAP && !a.heuristic {
                expansion_exact(&g, eps, mode)?
            } else {
                expansion_heuristic(&g, eps, mode, a.budget.unwrap_or(20_000), seed)?
            };
            sink.json("expansion.json", &report)?;
        }
        Command::Bridges(a) => {
            let g = a.graph.load(master)?.graph;
            let report = pivotal_bridge_report(
                &g,
                a.root.unwrap_or(0),
                a.k.ok_or_else(|| Error::Config("bridges needs --k".into()))?,
                a.p.params()?.p,
                a.trials.unwrap_or(10_000),
                seed,
                a.fd_step.unwrap_or(outbreak_local::percolation::DEFAULT_FD_STEP),
            )?;
            sink.csv("bridges.csv", &format!("{}{}", BridgeReport::CSV_HEADER, report.csv_row()))?;
            if out.is_some() {
                sink.json("bridges.json", &report)?;
            }
        }
        Command::Oracle(a) => {
            let g = a.graph.load(master)?.graph;
            let value = oracle_value(&g, a)?;
            match out {
                Some(_) => sink.json("oracle.json", &value)?,
                None => println!("{}", serde_json::to_string(&value).map_err(Error::from)?),
            }
        }
        Command::Experiment => unreachable!(),
    }
    Ok(())
}

fn oracle_value(g: &Graph, a: &args::OracleArgs) -> Result<serde_json::Value> {
    let fraction = |q: &BigRational| serde_json::Value::String(q.to_string());
    let exact = match &a.rational {
        Some(text) if a.p.p.is_some() || a.p.lambda.is_some() => {
            return Err(Error::Config(format!("--rational {text} conflicts with --p/--lambda")));
        }
        Some(text) => Some(args::parse_rational(text)?),
        None => None,
    };
    if let Some(k) = a.k {
        let vertex = a.vertex.unwrap_or(0);
        return Ok(match &exact {
            Some(p) => {
                let law = oracle::reach_table(g, vertex, k)?.law_rational(p)?;
                serde_json::json!({ "zeta_k": fraction(&law.probability_of(1)) })
            }
            None => serde_json::json!({ "zeta_k": oracle::exact_zeta_k(g, vertex, k, a.p.params()?.p)? }),
        });
    }
    let seeds: Vec<usize> = match (&a.seeds, a.vertex) {
        (Some(s), _) => s.clone(),
        (None, Some(v)) => vec![v],
        (None, None) => vec![0],
    };
    let table = oracle::outbreak_size_table(g, &seeds)?;
    if let Some(p) = &exact {
        let law = table.law_rational(p)?;
        let map: serde_json::Map<String, serde_json::Value> = law
            .support
            .iter()
            .zip(&law.probabilities)
            .map(|(s, q)| (s.to_string(), fraction(q)))
            .collect();
        return Ok(serde_json::Value::Object(map));
    }
    Ok(serde_json::to_value(table.law(a.p.params()?.p)?.to_map())?)
}

fn experiment(cli: &Cli) -> std::result::Result<(), Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("experiment needs --config".into()))?;
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    let manifest = run_experiment(&config)?;
    let failed: Vec<String> = manifest
        .failed_tasks()
        .map(|t| format!("{} ({})", t.name, t.error.as_ref().map_or("", |e| e.code.as_str())))
        .collect();
    println!("{}", config.out.join(outbreak_local::harness::MANIFEST_FILE).display());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime("E_TASK_FAILED".into(), format!("failed tasks: {}", failed.join(", "))))
    }
}

impl GraphArgs {
    fn is_given(&self) -> bool {
        self.graph.is_some() || self.model.is_some() || self.gen.is_some()
    }

    /// The graph from `--graph`, a `gen` spec in the config, or model flags.
    fn load(&self, master: u64) -> Result<Generated> {
        if let Some(path) = &self.graph {
            let graph = read_edge_list(path)?;
            let provenance = outbreak_local::generators::Provenance::new("edge_list", 0);
            return Ok(Generated {
                graph,
                provenance,
                membership: None,
            });
        }
        let seed = self.gen_seed.unwrap_or_else(|| task_seed(master, "graph"));
        let spec = match (&self.gen, &self.model) {
            (Some(spec), _) => spec.clone(),
            (None, Some(model)) => GenSpec::new(self.model_spec(model)?, seed),
            (None, None) => return Err(Error::Config("give --graph or --model".into())),
        };
        spec.validate()?;
        let generated = spec.generate()?;
        match &self.motifs {
            Some(path) => {
                let motifs = MotifDistribution::from_json(&std::fs::read_to_string(path)?)?;
                gen_motif_overlay(&generated.graph, &motifs, outbreak_local::seed::substream(seed, 2))
            }
            None => Ok(generated),
        }
    }

    fn model_spec(&self, model: &str) -> Result<GenModel> {
        let need = |v: Option<usize>, flag: &str| {
            v.ok_or_else(|| Error::Config(format!("--model {model} needs --{flag}")))
        };
        Ok(match model {
            "cm" => GenModel::Cm {
                degrees: self
                    .degrees
                    .clone()
                    .ok_or_else(|| Error::Config("--model cm needs --degrees".into()))?,
                max_retries: outbreak_local::generators::DEFAULT_MAX_RETRIES,
            },
            "pa" => GenModel::Pa {
                m: need(self.m, "m")?,
                n: need(self.n, "n")?,
            },
            "two_block" => GenModel::TwoBlock {
                d: need(self.d, "d")?,
                n: need(self.n, "n")?,
            },
            "k_regular" => GenModel::KRegular {
                d: need(self.d, "d")?,
                n: need(self.n, "n")?,
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown model {other:?}; expected cm, pa, two_block or k_regular"
                )))
            }
        })
    }
}
