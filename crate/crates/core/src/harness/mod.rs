//! Experiment runner: a JSON config names a graph, a transmission parameter
//! and a list of tasks; each task writes CSV/JSON artifacts stamped with the
//! config hash, and a manifest records the SHA-256 of every file.

mod config;

pub use config::{ExperimentConfig, ProcessConfig, TaskConfig, TaskKind};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::epidemic::{
    estimate, estimate_degree_biased, outbreak_histogram, EstimateOptions, HistogramOptions,
    TransmissionParams,
};
use crate::error::{Error, Result};
use crate::generators::Generated;
use crate::graph::{expansion_exact, expansion_heuristic, DegreeSequence, Graph, EXACT_EXPANSION_CAP};
use crate::percolation::{
    giant_fraction, pivotal_bridge_report, survival_curve_analytic, survival_curve_empirical,
    BridgeReport, DegreeLaw,
};
use crate::seed;

/// Version string embedded in every artifact.
pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

/// Environment variable consulted when no thread count is given.
pub const THREADS_ENV: &str = "OUTBREAK_LOCAL_THREADS";

/// Thread count from the flag, else from [`THREADS_ENV`]; `None` leaves the
/// choice to rayon.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    let threads = match flag {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(text) if !text.trim().is_empty() => Some(text.trim().parse().map_err(|_| {
                Error::Config(format!("{THREADS_ENV}={text:?} is not a thread count"))
            })?),
            _ => None,
        },
    };
    if threads == Some(0) {
        return Err(Error::Config("thread count must be at least 1".into()));
    }
    Ok(threads)
}

/// Runs `f` inside a dedicated rayon pool of the given size.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Stamp carried by every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactProvenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub task: String,
}

impl ArtifactProvenance {
    pub fn new(config_hash: &str, seed: u64, task: &str) -> ArtifactProvenance {
        ArtifactProvenance {
            config_hash: config_hash.into(),
            seed,
            version: VERSION.into(),
            task: task.into(),
        }
    }

    /// First line of a CSV artifact.
    pub fn csv_comment(&self) -> String {
        format!(
            "# config_hash={} seed={} version={} task={}\n",
            self.config_hash, self.seed, self.version, self.task
        )
    }

    pub fn stamp_csv(&self, body: &str) -> String {
        self.csv_comment() + body
    }

    /// `{"provenance": .., "result": ..}`, pretty-printed with a final newline.
    pub fn stamp_json(&self, result: &impl Serialize) -> Result<String> {
        let doc = json!({ "provenance": self, "result": result });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }
}

/// Short hash of a value's compact JSON form, the same scheme as config hashes.
pub fn hash_json(value: &impl Serialize) -> Result<String> {
    Ok(crate::generators::short_hash(serde_json::to_string(value)?.as_bytes()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskError {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskEntry {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    pub status: TaskStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<TaskError>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config_hash: String,
    pub master_seed: u64,
    /// The config as run, so every artifact can be re-derived.
    pub config: Value,
    pub graph: Value,
    pub tasks: Vec<TaskEntry>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn failed_tasks(&self) -> impl Iterator<Item = &TaskEntry> {
        self.tasks.iter().filter(|t| t.status == TaskStatus::Failed)
    }

    pub fn all_ok(&self) -> bool {
        self.failed_tasks().next().is_none()
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes artifacts into one directory and records their hashes.
struct Writer {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Writer {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.files.push(FileEntry {
            path: name.into(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len(),
        });
        Ok(())
    }
}

fn graph_summary(generated: &Generated) -> Value {
    json!({
        "n": generated.graph.n(),
        "m": generated.graph.m(),
        "max_degree": generated.graph.max_degree(),
        "provenance": generated.provenance,
    })
}

/// Validates the config, generates the graph and runs every task in order.
/// A failing task is recorded in the manifest and the remaining tasks still
/// run; only validation and graph generation errors abort the run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Manifest> {
    config.validate()?;
    let generated = config.gen.generate()?;
    run_on_graph(config, &generated)
}

/// As [`run_experiment`] with an already generated graph.
pub fn run_on_graph(config: &ExperimentConfig, generated: &Generated) -> Result<Manifest> {
    config.validate()?;
    let hash = config.hash();
    std::fs::create_dir_all(&config.out)?;
    let mut writer = Writer {
        dir: config.out.clone(),
        files: Vec::new(),
    };
    let graph = graph_summary(generated);
    let graph_stamp = ArtifactProvenance::new(&hash, config.gen.seed, "graph");
    writer.write("graph.json", &graph_stamp.stamp_json(&graph)?)?;

    let params = config.process.params()?;
    let mut tasks = Vec::new();
    for (task, name) in config.tasks.iter().zip(config.task_names()) {
        let task_seed = seed::task_seed(config.master_seed, &name);
        let stamp = ArtifactProvenance::new(&hash, task_seed, &name);
        let before = writer.files.len();
        let outcome = run_task(&generated.graph, &task.kind, params, &config.process.grid, &name, &stamp)
            .and_then(|artifacts| {
                for (file, contents) in artifacts {
                    writer.write(&file, &contents)?;
                }
                Ok(())
            });
        let files = writer.files[before..].iter().map(|f| f.path.clone()).collect();
        let (status, error) = match outcome {
            Ok(()) => (TaskStatus::Ok, None),
            Err(e) => (
                TaskStatus::Failed,
                Some(TaskError {
                    code: e.code().into(),
                    message: e.to_string(),
                }),
            ),
        };
        tasks.push(TaskEntry {
            name,
            kind: task.kind.kind().into(),
            seed: task_seed,
            status,
            error,
            files,
        });
    }

    let manifest = Manifest {
        version: VERSION.into(),
        config_hash: hash,
        master_seed: config.master_seed,
        config: serde_json::to_value(config)?,
        graph,
        tasks,
        files: writer.files,
    };
    std::fs::write(
        config.out.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(manifest)
}

type Artifacts = Vec<(String, String)>;

fn run_task(
    g: &Graph,
    task: &TaskKind,
    params: Option<TransmissionParams>,
    grid: &[f64],
    name: &str,
    stamp: &ArtifactProvenance,
) -> Result<Artifacts> {
    let seed = stamp.seed;
    let need_params = || params.ok_or_else(|| Error::Config(format!("task {name} needs p")));
    let mut out = Vec::new();
    match *task {
        TaskKind::Histogram {
            trials,
            delta,
            zeta_ref,
            bins,
        } => {
            let options = HistogramOptions {
                delta,
                zeta_ref,
                bins,
            };
            let hist = outbreak_histogram(g, trials, need_params()?, seed, options)?;
            out.push((format!("{name}.csv"), stamp.stamp_csv(&hist.to_csv())));
            out.push((format!("{name}.json"), stamp.stamp_json(&hist)?));
        }
        TaskKind::Estimate {
            k,
            q,
            rule,
            degree_biased,
            overlap_sample,
        } => {
            let options = EstimateOptions {
                rule,
                overlap_sample,
            };
            let report = if degree_biased {
                estimate_degree_biased(g, k, q, need_params()?, seed, options)?
            } else {
                estimate(g, k, q, need_params()?, seed, options)?
            };
            out.push((format!("{name}_queries.csv"), stamp.stamp_csv(&report.queries_csv())));
            out.push((format!("{name}.json"), stamp.stamp_json(&report)?));
        }
        TaskKind::Giant { trials } => {
            let summary = giant_fraction(g, need_params()?.p, trials, seed)?;
            out.push((format!("{name}.csv"), stamp.stamp_csv(&summary.to_csv())));
            let result = json!({ "p": summary.p, "trials": trials, "estimate": summary.estimate });
            out.push((format!("{name}.json"), stamp.stamp_json(&result)?));
        }
        TaskKind::Survival { trials } => {
            let law = DegreeLaw::from_sequence(&DegreeSequence::new(g.degrees()))?;
            let analytic = survival_curve_analytic(&law, grid)?;
            let empirical = survival_curve_empirical(g, grid, trials, seed)?;
            out.push((format!("{name}_analytic.csv"), stamp.stamp_csv(&analytic.to_csv())));
            out.push((format!("{name}_empirical.csv"), stamp.stamp_csv(&empirical.to_csv())));
        }
        TaskKind::Expansion { eps, mode, budget } => {
            let report = if g.n() <= EXACT_EXPANSION_CAP {
                expansion_exact(g, eps, mode)?
            } else {
                expansion_heuristic(g, eps, mode, budget, seed)?
            };
            out.push((format!("{name}.json"), stamp.stamp_json(&report)?));
        }
        TaskKind::Bridges {
            root,
            k,
            trials,
            fd_step,
        } => {
            let report = pivotal_bridge_report(g, root, k, need_params()?.p, trials, seed, fd_step)?;
            let csv = format!("{}{}", BridgeReport::CSV_HEADER, report.csv_row());
            out.push((format!("{name}.csv"), stamp.stamp_csv(&csv)));
            out.push((format!("{name}.json"), stamp.stamp_json(&report)?));
        }
    }
    Ok(out)
}

/// Reads a manifest back from an output directory.
pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    Ok(serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST_FILE))?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dir: &Path, tasks: &str) -> ExperimentConfig {
        let text = format!(
            r#"{{"gen": {{"model": "k_regular", "d": 3, "n": 400, "seed": 5}},
                "process": {{"p": 0.7, "grid": [0.3, 0.6, 0.9]}},
                "tasks": {tasks},
                "master_seed": 11,
                "out": {:?}}}"#,
            dir.display().to_string()
        );
        ExperimentConfig::from_json(&text).unwrap()
    }

    const ALL_TASKS: &str = r#"[
        {"task": "histogram", "trials": 50},
        {"task": "estimate", "k": 10, "q": 100},
        {"task": "estimate", "k": 20, "q": 100, "degree_biased": true},
        {"task": "giant", "trials": 5},
        {"task": "survival", "trials": 3},
        {"task": "expansion", "eps": 0.1, "budget": 200},
        {"task": "bridges", "root": 0, "k": 3, "trials": 200}
    ]"#;

    #[test]
    fn repeat_runs_give_identical_manifests() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ma = run_experiment(&config(a.path(), ALL_TASKS)).unwrap();
        let mb = with_threads(Some(3), || run_experiment(&config(b.path(), ALL_TASKS)))
            .unwrap()
            .unwrap();
        assert!(ma.all_ok());
        assert_eq!(ma.files, mb.files);
        assert_eq!(ma.tasks, mb.tasks);
        let names: Vec<&str> = ma.tasks.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(
            names,
            ["histogram", "estimate_1", "estimate_2", "giant", "survival", "expansion", "bridges"]
        );
        for f in &ma.files {
            let text = std::fs::read_to_string(a.path().join(&f.path)).unwrap();
            assert_eq!(sha256_hex(text.as_bytes()), f.sha256);
            assert!(text.contains(&ma.config_hash), "{} lacks the config hash", f.path);
        }
        assert_eq!(read_manifest(a.path()).unwrap(), ma);
    }

    #[test]
    fn survival_csvs_share_the_grid() {
        let dir = tempfile::tempdir().unwrap();
        run_experiment(&config(dir.path(), r#"[{"task": "survival", "trials": 2}]"#)).unwrap();
        let grid = |file: &str| -> Vec<String> {
            std::fs::read_to_string(dir.path().join(file))
                .unwrap()
                .lines()
                .skip(2)
                .map(|l| l.split(',').next().unwrap().to_string())
                .collect()
        };
        assert_eq!(grid("survival_analytic.csv"), ["0.3", "0.6", "0.9"]);
        assert_eq!(grid("survival_analytic.csv"), grid("survival_empirical.csv"));
    }

    #[test]
    fn failing_task_keeps_other_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let tasks = r#"[
            {"task": "giant", "trials": 2},
            {"task": "bridges", "root": 999, "k": 2, "trials": 10},
            {"task": "estimate", "k": 5, "q": 10}
        ]"#;
        let m = run_experiment(&config(dir.path(), tasks)).unwrap();
        let status: Vec<_> = m.tasks.iter().map(|t| t.status.clone()).collect();
        assert_eq!(status, [TaskStatus::Ok, TaskStatus::Failed, TaskStatus::Ok]);
        assert_eq!(m.tasks[1].error.as_ref().unwrap().code, "E_VERTEX_RANGE");
        assert!(dir.path().join("giant.csv").exists());
        assert!(dir.path().join("estimate.json").exists());
    }

    #[test]
    fn validation_runs_before_any_task() {
        let dir = tempfile::tempdir().unwrap();
        let bad = [
            r#"[{"task": "giant", "trials": 0}]"#,
            r#"[{"task": "histogram", "trials": 5, "delta": 0.7}]"#,
            r#"[{"name": "x", "task": "giant", "trials": 1}, {"name": "x", "task": "giant", "trials": 1}]"#,
            r#"[{"name": "../x", "task": "giant", "trials": 1}]"#,
            r#"[]"#,
        ];
        for tasks in bad {
            let cfg = config(&dir.path().join("never"), tasks);
            assert!(run_experiment(&cfg).unwrap_err().is_validation(), "{tasks}");
            assert!(!dir.path().join("never").exists());
        }
        let mut cfg = config(dir.path(), r#"[{"task": "giant", "trials": 1}]"#);
        cfg.process = ProcessConfig::default();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = config(Path::new("/tmp/a"), ALL_TASKS);
        let b = config(Path::new("/tmp/b"), ALL_TASKS);
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.master_seed += 1;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn two_block_histogram_has_three_clusters() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            r#"{{"gen": {{"model": "two_block", "d": 3, "n": 20000, "seed": 2}},
                "process": {{"p": 0.7}},
                "tasks": [{{"task": "histogram", "trials": 400, "zeta_ref": 0.9213}}],
                "master_seed": 4, "out": {:?}}}"#,
            dir.path().display().to_string()
        );
        run_experiment(&ExperimentConfig::from_json(&text).unwrap()).unwrap();
        let doc: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("histogram.json")).unwrap())
                .unwrap();
        let bins: Vec<u64> = doc["result"]["bin_counts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .collect();
        let mass = |lo: usize, hi: usize| bins[lo..hi].iter().sum::<u64>();
        assert!(mass(0, 5) > 0 && mass(41, 51) > 0 && mass(85, 100) > 0);
    }

    #[test]
    fn thread_resolution() {
        assert_eq!(resolve_threads(Some(4)).unwrap(), Some(4));
        assert!(resolve_threads(Some(0)).is_err());
    }
}
