use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::epidemic::{SuccessRule, TransmissionParams, DEFAULT_OVERLAP_SAMPLE};
use crate::error::{Error, Result};
use crate::generators::{short_hash, GenSpec};
use crate::graph::ExpansionMode;
use crate::percolation::{check_probability, DEFAULT_FD_STEP};

/// Transmission parameter and the p-grid used by survival tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Infection rate; converted with `p = λ/(λ+1)`. Exclusive with `p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<f64>,
}

impl ProcessConfig {
    pub fn params(&self) -> Result<Option<TransmissionParams>> {
        match (self.p, self.lambda) {
            (Some(_), Some(_)) => Err(Error::Config("give either p or lambda, not both".into())),
            (Some(p), None) => TransmissionParams::from_p(p).map(Some),
            (None, Some(l)) => TransmissionParams::from_lambda(l).map(Some),
            (None, None) => Ok(None),
        }
    }
}

fn default_delta() -> f64 {
    0.05
}
fn default_bins() -> usize {
    100
}
fn default_overlap() -> usize {
    DEFAULT_OVERLAP_SAMPLE
}
fn default_budget() -> usize {
    20_000
}
fn default_fd_step() -> f64 {
    DEFAULT_FD_STEP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskKind {
    Histogram {
        trials: usize,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        zeta_ref: Option<f64>,
        #[serde(default = "default_bins")]
        bins: usize,
    },
    Estimate {
        k: usize,
        q: usize,
        #[serde(default)]
        rule: SuccessRule,
        #[serde(default)]
        degree_biased: bool,
        #[serde(default = "default_overlap")]
        overlap_sample: usize,
    },
    Giant {
        trials: usize,
    },
    Survival {
        trials: usize,
    },
    Expansion {
        eps: f64,
        #[serde(default = "default_mode")]
        mode: ExpansionMode,
        #[serde(default = "default_budget")]
        budget: usize,
    },
    Bridges {
        root: usize,
        k: usize,
        trials: usize,
        #[serde(default = "default_fd_step")]
        fd_step: f64,
    },
}

fn default_mode() -> ExpansionMode {
    ExpansionMode::Edge
}

impl TaskKind {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskKind::Histogram { .. } => "histogram",
            TaskKind::Estimate { .. } => "estimate",
            TaskKind::Giant { .. } => "giant",
            TaskKind::Survival { .. } => "survival",
            TaskKind::Expansion { .. } => "expansion",
            TaskKind::Bridges { .. } => "bridges",
        }
    }

    fn needs_p(&self) -> bool {
        !matches!(self, TaskKind::Survival { .. } | TaskKind::Expansion { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskConfig {
    /// Output file stem and seed label; defaults to the task kind, suffixed
    /// with the task index when the kind repeats.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub kind: TaskKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub gen: GenSpec,
    #[serde(default)]
    pub process: ProcessConfig,
    pub tasks: Vec<TaskConfig>,
    pub master_seed: u64,
    /// Output directory; not part of the config hash.
    #[serde(default = "default_out", skip_serializing)]
    pub out: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        ExperimentConfig::from_json(&std::fs::read_to_string(path)?)
    }

    /// Hash of the compact JSON form without the output directory.
    pub fn hash(&self) -> String {
        short_hash(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    /// Resolved task names, in declared order.
    pub fn task_names(&self) -> Vec<String> {
        let kinds: Vec<&str> = self.tasks.iter().map(|t| t.kind.kind()).collect();
        self.tasks
            .iter()
            .enumerate()
            .map(|(i, t)| match &t.name {
                Some(name) => name.clone(),
                None if kinds.iter().filter(|&&k| k == kinds[i]).count() > 1 => {
                    format!("{}_{i}", kinds[i])
                }
                None => kinds[i].to_string(),
            })
            .collect()
    }

    /// Checks every task against the process settings before anything runs.
    pub fn validate(&self) -> Result<()> {
        self.gen.validate()?;
        let params = self.process.params()?;
        for &p in &self.process.grid {
            check_probability(p)?;
        }
        if self.process.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("process.grid must be strictly increasing".into()));
        }
        if self.tasks.is_empty() {
            return Err(Error::Config("no tasks".into()));
        }
        let names = self.task_names();
        let mut seen = BTreeSet::new();
        for name in &names {
            let clean = !name.is_empty()
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            if !clean {
                return Err(Error::Config(format!("task name {name:?} must be [A-Za-z0-9_-]+")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Config(format!("duplicate task name {name:?}")));
            }
        }
        for (task, name) in self.tasks.iter().zip(&names) {
            let bad = |msg: &str| Err(Error::Config(format!("task {name}: {msg}")));
            if task.kind.needs_p() && params.is_none() {
                return bad("needs process.p or process.lambda");
            }
            match &task.kind {
                TaskKind::Histogram {
                    trials,
                    delta,
                    zeta_ref,
                    bins,
                } => {
                    if *trials == 0 || *bins == 0 {
                        return bad("trials and bins must be positive");
                    }
                    if !(*delta > 0.0 && *delta < 0.5) {
                        return bad("delta must lie in (0, 0.5)");
                    }
                    if let Some(z) = zeta_ref {
                        if !(0.0..=1.0).contains(z) {
                            return bad("zeta_ref must lie in [0, 1]");
                        }
                    }
                }
                TaskKind::Estimate { k, q, .. } => {
                    if *k == 0 || *q == 0 {
                        return bad("k and q must be positive");
                    }
                }
                TaskKind::Giant { trials } => {
                    if *trials == 0 {
                        return bad("trials must be positive");
                    }
                }
                TaskKind::Survival { trials } => {
                    if *trials == 0 {
                        return bad("trials must be positive");
                    }
                    if self.process.grid.is_empty() {
                        return bad("needs process.grid");
                    }
                }
                TaskKind::Expansion { eps, budget, .. } => {
                    if !(*eps > 0.0 && *eps <= 0.5) {
                        return bad("eps must lie in (0, 0.5]");
                    }
                    if *budget == 0 {
                        return bad("budget must be positive");
                    }
                }
                TaskKind::Bridges { k, trials, fd_step, .. } => {
                    if *k == 0 || *trials == 0 {
                        return bad("k and trials must be positive");
                    }
                    if !(*fd_step > 0.0) {
                        return bad("fd_step must be positive");
                    }
                }
            }
        }
        Ok(())
    }
}
