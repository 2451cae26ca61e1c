//! Python module `outbreak_local`. Reports come back as plain dicts built
//! from the same JSON the CLI writes.

use std::path::PathBuf;

use outbreak_local::epidemic::{
    self, EstimateOptions, HistogramOptions, SuccessRule, TransmissionParams,
};
use outbreak_local::generators::{self, DegreeSpec, GenModel, GenSpec, Generated, MotifDistribution};
use outbreak_local::graph::{self, ExpansionMode, EXACT_EXPANSION_CAP};
use outbreak_local::harness::{self, ExperimentConfig};
use outbreak_local::percolation::{self, DegreeLaw};
use outbreak_local::{oracle, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

fn to_py(e: Error) -> PyErr {
    let message = format!("[{}] {e}", e.code());
    if e.is_validation() {
        PyValueError::new_err(message)
    } else {
        PyRuntimeError::new_err(message)
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for outbreak_local::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Serializes through JSON into Python objects.
fn to_object<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| to_py(e.into()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn named<T: serde::de::DeserializeOwned>(text: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(text.into()))
        .map_err(|_| PyValueError::new_err(format!("unknown option {text:?}")))
}

fn params(p: f64) -> PyResult<TransmissionParams> {
    TransmissionParams::from_p(p).py_err()
}

#[pyclass(name = "Graph", module = "outbreak_local", frozen)]
pub struct PyGraph {
    inner: graph::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<PyGraph> {
        Ok(PyGraph {
            inner: graph::Graph::from_edges(n, &edges).py_err()?,
        })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<PyGraph> {
        Ok(PyGraph {
            inner: graph::read_edge_list(path).py_err()?,
        })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<PyGraph> {
        Ok(PyGraph {
            inner: graph::parse_edge_list(text).py_err()?,
        })
    }

    #[staticmethod]
    fn path(n: usize) -> PyGraph {
        PyGraph {
            inner: graph::Graph::path(n),
        }
    }

    #[staticmethod]
    fn cycle(n: usize) -> PyGraph {
        PyGraph {
            inner: graph::Graph::cycle(n),
        }
    }

    #[staticmethod]
    fn complete(n: usize) -> PyGraph {
        PyGraph {
            inner: graph::Graph::complete(n),
        }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        self.inner.check_vertex(v).py_err()?;
        Ok(self.inner.degree(v))
    }

    fn degrees(&self) -> Vec<usize> {
        self.inner.degrees()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        self.inner.check_vertex(v).py_err()?;
        Ok(self.inner.neighbors(v).iter().map(|&w| w as usize).collect())
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn to_edge_list(&self) -> String {
        let mut out = Vec::new();
        graph::write_edge_list(&self.inner, &mut out).expect("writing to memory");
        String::from_utf8(out).expect("edge list is utf-8")
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

fn generated<'py>(py: Python<'py>, out: Generated) -> PyResult<(PyGraph, Bound<'py, PyAny>)> {
    let provenance = to_object(py, &out.provenance)?;
    if let Some(membership) = &out.membership {
        provenance.set_item("membership", membership.clone())?;
    }
    Ok((PyGraph { inner: out.graph }, provenance))
}

/// Uniform simple graph with the given degrees; returns `(graph, provenance)`.
#[pyfunction]
#[pyo3(signature = (degrees, seed, max_retries = generators::DEFAULT_MAX_RETRIES))]
fn gen_cm<'py>(
    py: Python<'py>,
    degrees: Vec<usize>,
    seed: u64,
    max_retries: usize,
) -> PyResult<(PyGraph, Bound<'py, PyAny>)> {
    let spec = GenSpec::new(
        GenModel::Cm {
            degrees: DegreeSpec::List(degrees),
            max_retries,
        },
        seed,
    );
    spec.validate().py_err()?;
    let out = py.detach(|| spec.generate()).py_err()?;
    generated(py, out)
}

#[pyfunction]
fn gen_k_regular<'py>(py: Python<'py>, d: usize, n: usize, seed: u64) -> PyResult<(PyGraph, Bound<'py, PyAny>)> {
    let out = py.detach(|| generators::gen_k_regular(d, n, seed)).py_err()?;
    generated(py, out)
}

#[pyfunction]
fn gen_pa<'py>(py: Python<'py>, m: usize, n: usize, seed: u64) -> PyResult<(PyGraph, Bound<'py, PyAny>)> {
    let (out, stats) = py.detach(|| generators::gen_pa(m, n, seed)).py_err()?;
    let (g, provenance) = generated(py, out)?;
    provenance.set_item("acceptance_rate", stats.acceptance_rate())?;
    provenance.set_item("rejection_bound", stats.rejection_bound)?;
    Ok((g, provenance))
}

#[pyfunction]
fn gen_two_block<'py>(py: Python<'py>, d: usize, n: usize, seed: u64) -> PyResult<(PyGraph, Bound<'py, PyAny>)> {
    let out = py.detach(|| generators::gen_two_block(d, n, seed)).py_err()?;
    generated(py, out)
}

/// Replaces each vertex of `g` by a motif drawn from the JSON table.
#[pyfunction]
fn gen_motif_overlay<'py>(
    py: Python<'py>,
    g: &PyGraph,
    motifs_json: &str,
    seed: u64,
) -> PyResult<(PyGraph, Bound<'py, PyAny>)> {
    let motifs = MotifDistribution::from_json(motifs_json).py_err()?;
    let out = py
        .detach(|| generators::gen_motif_overlay(&g.inner, &motifs, seed))
        .py_err()?;
    generated(py, out)
}

#[pyfunction]
fn lambda_to_p(lambda: f64) -> PyResult<f64> {
    epidemic::lambda_to_p(lambda).py_err()
}

/// Open/closed flag per edge id.
#[pyfunction]
#[pyo3(signature = (g, p, seed, trial = 0))]
fn percolate(g: &PyGraph, p: f64, seed: u64, trial: u64) -> PyResult<Vec<bool>> {
    let mask = percolation::percolate(&g.inner, p, seed, trial).py_err()?;
    Ok((0..mask.len()).map(|e| mask.is_open(e)).collect())
}

#[pyfunction]
fn giant_fraction<'py>(py: Python<'py>, g: &PyGraph, p: f64, trials: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let summary = py
        .detach(|| percolation::giant_fraction(&g.inner, p, trials, seed))
        .py_err()?;
    to_object(py, &summary)
}

/// `(zeta, eta)` for a configuration model with degree pmf `pmf[k] = P(D = k)`.
#[pyfunction]
fn survival_fixed_point(pmf: Vec<f64>, p: f64) -> PyResult<(f64, f64)> {
    let law = DegreeLaw::from_pmf(pmf).py_err()?;
    let fp = percolation::survival_fixed_point_cm(&law, p).py_err()?;
    Ok((fp.zeta, fp.eta))
}

#[pyfunction]
fn survival_curve<'py>(py: Python<'py>, pmf: Vec<f64>, grid: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let law = DegreeLaw::from_pmf(pmf).py_err()?;
    to_object(py, &percolation::survival_curve_analytic(&law, &grid).py_err()?)
}

/// SIR with transmission probability `p`; `stream` selects the edge tape.
#[pyfunction]
fn run_sir<'py>(py: Python<'py>, g: &PyGraph, seeds: Vec<usize>, p: f64, stream: u64) -> PyResult<Bound<'py, PyAny>> {
    let run = epidemic::run_sir(&g.inner, &seeds, params(p)?, stream).py_err()?;
    let out = PyDict::new(py);
    out.set_item("final_size", run.record.final_size)?;
    out.set_item("relative_size", run.record.relative_size)?;
    out.set_item("infected", run.infected)?;
    out.set_item("generations", run.generations)?;
    Ok(out.into_any())
}

/// One local query: `(hit, recovered, ball_size)`.
#[pyfunction]
#[pyo3(signature = (g, v, k, p, stream, rule = "seed_counted"))]
fn local_query(g: &PyGraph, v: usize, k: usize, p: f64, stream: u64, rule: &str) -> PyResult<(bool, usize, usize)> {
    let rule: SuccessRule = named(rule)?;
    let r = epidemic::local_query(&g.inner, v, k, params(p)?, stream, rule).py_err()?;
    Ok((r.hit, r.recovered, r.ball_size))
}

#[pyfunction]
#[pyo3(signature = (g, k, q, p, seed, degree_biased = false, rule = "seed_counted"))]
#[allow(clippy::too_many_arguments)]
fn estimate<'py>(
    py: Python<'py>,
    g: &PyGraph,
    k: usize,
    q: usize,
    p: f64,
    seed: u64,
    degree_biased: bool,
    rule: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let options = EstimateOptions {
        rule: named(rule)?,
        ..EstimateOptions::default()
    };
    let params = params(p)?;
    let report = py
        .detach(|| {
            if degree_biased {
                epidemic::estimate_degree_biased(&g.inner, k, q, params, seed, options)
            } else {
                epidemic::estimate(&g.inner, k, q, params, seed, options)
            }
        })
        .py_err()?;
    to_object(py, &report)
}

#[pyfunction]
#[pyo3(signature = (g, trials, p, seed, delta = 0.05, zeta_ref = None, bins = 100))]
#[allow(clippy::too_many_arguments)]
fn outbreak_histogram<'py>(
    py: Python<'py>,
    g: &PyGraph,
    trials: usize,
    p: f64,
    seed: u64,
    delta: f64,
    zeta_ref: Option<f64>,
    bins: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let options = HistogramOptions { delta, zeta_ref, bins };
    let params = params(p)?;
    let hist = py
        .detach(|| epidemic::outbreak_histogram(&g.inner, trials, params, seed, options))
        .py_err()?;
    let out = to_object(py, &hist)?;
    let sizes: Vec<usize> = hist.rows.iter().map(|r| r.final_size).collect();
    out.set_item("final_sizes", sizes)?;
    Ok(out)
}

fn law_dict<'py>(py: Python<'py>, law: &oracle::ExactLaw) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    for (s, q) in law.support.iter().zip(&law.probabilities) {
        out.set_item(*s, *q)?;
    }
    Ok(out)
}

/// Exact law of `|C(v)|` as `{size: probability}`.
#[pyfunction]
fn exact_component_distribution<'py>(py: Python<'py>, g: &PyGraph, v: usize, p: f64) -> PyResult<Bound<'py, PyDict>> {
    let law = py
        .detach(|| oracle::exact_component_distribution(&g.inner, v, p))
        .py_err()?;
    law_dict(py, &law)
}

#[pyfunction]
fn exact_outbreak_distribution<'py>(
    py: Python<'py>,
    g: &PyGraph,
    seeds: Vec<usize>,
    p: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let law = py
        .detach(|| oracle::exact_outbreak_distribution(&g.inner, &seeds, p))
        .py_err()?;
    law_dict(py, &law)
}

#[pyfunction]
fn exact_zeta_k(g: &PyGraph, v: usize, k: usize, p: f64) -> PyResult<f64> {
    oracle::exact_zeta_k(&g.inner, v, k, p).py_err()
}

/// Exact on graphs up to the enumeration cap, local search beyond.
#[pyfunction]
#[pyo3(signature = (g, eps, mode = "edge", budget = 20_000, seed = 0))]
fn expansion<'py>(
    py: Python<'py>,
    g: &PyGraph,
    eps: f64,
    mode: &str,
    budget: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mode: ExpansionMode = named(mode)?;
    let report = py
        .detach(|| {
            if g.inner.n() <= EXACT_EXPANSION_CAP {
                graph::expansion_exact(&g.inner, eps, mode)
            } else {
                graph::expansion_heuristic(&g.inner, eps, mode, budget, seed)
            }
        })
        .py_err()?;
    to_object(py, &report)
}

#[pyfunction]
#[pyo3(signature = (g, root, k, p, trials, seed, fd_step = percolation::DEFAULT_FD_STEP))]
#[allow(clippy::too_many_arguments)]
fn pivotal_bridge_report<'py>(
    py: Python<'py>,
    g: &PyGraph,
    root: usize,
    k: usize,
    p: f64,
    trials: usize,
    seed: u64,
    fd_step: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let report = py
        .detach(|| percolation::pivotal_bridge_report(&g.inner, root, k, p, trials, seed, fd_step))
        .py_err()?;
    to_object(py, &report)
}

/// Runs an experiment config given as JSON text; returns the manifest.
#[pyfunction]
#[pyo3(signature = (config_json, out = None, threads = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    config_json: &str,
    out: Option<PathBuf>,
    threads: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut config = ExperimentConfig::from_json(config_json).py_err()?;
    if let Some(out) = out {
        config.out = out;
    }
    let threads = harness::resolve_threads(threads).py_err()?;
    let manifest = py
        .detach(|| harness::with_threads(threads, || harness::run_experiment(&config)))
        .py_err()?
        .py_err()?;
    to_object(py, &manifest)
}

#[pymodule(name = "outbreak_local")]
fn outbreak_local_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(gen_cm, m)?)?;
    m.add_function(wrap_pyfunction!(gen_k_regular, m)?)?;
    m.add_function(wrap_pyfunction!(gen_pa, m)?)?;
    m.add_function(wrap_pyfunction!(gen_two_block, m)?)?;
    m.add_function(wrap_pyfunction!(gen_motif_overlay, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_to_p, m)?)?;
    m.add_function(wrap_pyfunction!(percolate, m)?)?;
    m.add_function(wrap_pyfunction!(giant_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(survival_fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(survival_curve, m)?)?;
    m.add_function(wrap_pyfunction!(run_sir, m)?)?;
    m.add_function(wrap_pyfunction!(local_query, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(outbreak_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(exact_component_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(exact_outbreak_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(exact_zeta_k, m)?)?;
    m.add_function(wrap_pyfunction!(expansion, m)?)?;
    m.add_function(wrap_pyfunction!(pivotal_bridge_report, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
