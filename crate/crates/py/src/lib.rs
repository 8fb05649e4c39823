//! Python bindings: `import pfa`.

use std::collections::BTreeSet;
use std::error::Error as _;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pfa_core::report::to_json;
use pfa_core::{
    Batching, DagSpec, DofMode, Error, Graph, PfaConfig, PfaResult, Scenario, SynthSpec, VariableId,
};

fn py_err(e: Error) -> PyErr {
    let mut msg = e.to_string();
    let mut source = e.source();
    while let Some(s) = source {
        msg.push_str(": ");
        msg.push_str(&s.to_string());
        source = s.source();
    }
    match e {
        Error::Io { .. } => PyIOError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

type Subgraphs = Vec<Vec<usize>>;

fn to_ids(v: &BTreeSet<VariableId>) -> Vec<usize> {
    v.iter().map(|id| id.0).collect()
}

/// Variables as rows, data points as columns; the first `n_outputs` rows
/// are outputs. Variables are addressed by 1-based row index.
#[pyclass(name = "Dataset", module = "pfa", frozen)]
struct PyDataset(pfa_core::Dataset);

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (rows, n_outputs = 0))]
    fn new(rows: Vec<Vec<f64>>, n_outputs: usize) -> PyResult<Self> {
        pfa_core::Dataset::from_rows(rows, n_outputs)
            .map(PyDataset)
            .map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (path, n_outputs = 0))]
    fn load_csv(path: &str, n_outputs: usize) -> PyResult<Self> {
        pfa_core::Dataset::load_csv(path, n_outputs)
            .map(PyDataset)
            .map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (text, n_outputs = 0))]
    fn parse_csv(text: &str, n_outputs: usize) -> PyResult<Self> {
        pfa_core::Dataset::parse_csv(text, n_outputs)
            .map(PyDataset)
            .map_err(py_err)
    }

    fn save_csv(&self, path: &str) -> PyResult<()> {
        self.0.save_csv(path).map_err(py_err)
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.0.n_points()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.0.n_features()
    }

    #[getter]
    fn n_outputs(&self) -> usize {
        self.0.n_outputs()
    }

    /// Values of the variable with 1-based index `id`.
    fn variable(&self, id: usize) -> PyResult<Vec<f64>> {
        if id == 0 || id > self.0.n_rows() {
            return Err(PyValueError::new_err(format!("no variable {id}")));
        }
        Ok(self.0.variable(VariableId(id)).to_vec())
    }

    fn subsample(&self, fraction: f64, seed: u64) -> PyResult<Self> {
        self.0
            .subsample(fraction, seed)
            .map(PyDataset)
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n_outputs={}, n_features={}, n_points={})",
            self.0.n_outputs(),
            self.0.n_features(),
            self.0.n_points()
        )
    }
}

fn parse_batching(s: &str) -> PyResult<Batching> {
    match s {
        "ordered" => Ok(Batching::Ordered),
        "random" => Ok(Batching::Random),
        _ => Err(PyValueError::new_err(format!("unknown batching {s:?}"))),
    }
}

fn parse_dof_mode(s: &str) -> PyResult<DofMode> {
    match s {
        "independence" => Ok(DofMode::Independence),
        "cells_minus_one" => Ok(DofMode::CellsMinusOne),
        _ => Err(PyValueError::new_err(format!("unknown dof mode {s:?}"))),
    }
}

#[pyclass(name = "Config", module = "pfa", frozen)]
struct PyConfig(PfaConfig);

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (
        nu, *, alpha = 0.01, ns = 50, batching = "ordered", seed = 0, tie_seed = None,
        min_expected = 5.0, dof_mode = "independence", theta = None
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        nu: usize,
        alpha: f64,
        ns: usize,
        batching: &str,
        seed: u64,
        tie_seed: Option<u64>,
        min_expected: f64,
        dof_mode: &str,
        theta: Option<f64>,
    ) -> PyResult<Self> {
        let cfg = PfaConfig {
            nu,
            alpha,
            ns,
            batching: parse_batching(batching)?,
            seed,
            tie_seed,
            min_expected,
            dof_mode: parse_dof_mode(dof_mode)?,
            theta,
        };
        cfg.validate().map_err(py_err)?;
        Ok(PyConfig(cfg))
    }

    #[getter]
    fn nu(&self) -> usize {
        self.0.nu
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn ns(&self) -> usize {
        self.0.ns
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[getter]
    fn tie_seed(&self) -> Option<u64> {
        self.0.tie_seed
    }

    #[getter]
    fn theta(&self) -> Option<f64> {
        self.0.theta
    }

    fn to_json(&self) -> String {
        to_json(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Config({})", serde_repr(&self.0))
    }
}

fn serde_repr(cfg: &PfaConfig) -> String {
    to_json(cfg)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[pyclass(name = "Result", module = "pfa", frozen)]
struct PyPfaResult(PfaResult);

#[pymethods]
impl PyPfaResult {
    #[getter]
    fn principal_subgraphs(&self) -> Vec<Vec<usize>> {
        self.0.principal_subgraphs.iter().map(to_ids).collect()
    }

    #[getter]
    fn principal_features(&self) -> Vec<usize> {
        to_ids(&self.0.principal_features)
    }

    #[getter]
    fn relevant_features(&self) -> Option<Vec<usize>> {
        self.0.relevant_features.as_ref().map(to_ids)
    }

    #[getter]
    fn mi_features(&self) -> Option<Vec<usize>> {
        self.0.mi_features.as_ref().map(to_ids)
    }

    #[getter]
    fn mi_scores(&self) -> Option<Vec<(usize, f64)>> {
        self.0
            .mi_scores
            .as_ref()
            .map(|m| m.iter().map(|(k, &v)| (k.0, v)).collect())
    }

    /// MI-filtered features if computed, else relevant, else principal.
    #[getter]
    fn selected(&self) -> Vec<usize> {
        to_ids(self.0.selected())
    }

    #[getter]
    fn constants(&self) -> Vec<usize> {
        self.0.constants.iter().map(|id| id.0).collect()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.0.warnings.clone()
    }

    #[getter]
    fn passes(&self) -> usize {
        self.0.passes
    }

    /// Removal log as dicts with keys pass, batch, step, nodes, from_component.
    #[getter]
    fn removed<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.0
            .removed
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("pass", r.pass)?;
                d.set_item("batch", r.batch)?;
                d.set_item("step", r.step)?;
                d.set_item("nodes", to_ids(&r.nodes))?;
                d.set_item("from_component", to_ids(&r.from_component))?;
                Ok(d)
            })
            .collect()
    }

    fn to_json(&self) -> String {
        to_json(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Result(selected={:?})", to_ids(self.0.selected()))
    }
}

/// PFA alone, without output filtering.
#[pyfunction]
fn run_pfa(data: &PyDataset, config: &PyConfig) -> PyResult<PyPfaResult> {
    pfa_core::run_pfa(&data.0, &config.0)
        .map(PyPfaResult)
        .map_err(py_err)
}

/// PFA, then relevance filtering when there are outputs, then MI filtering
/// when the config sets `theta`.
#[pyfunction]
fn analyze(data: &PyDataset, config: &PyConfig) -> PyResult<PyPfaResult> {
    pfa_core::pfa::analyze(&data.0, &config.0)
        .map(PyPfaResult)
        .map_err(py_err)
}

/// Returns the intersection of the selected sets and the per-run results.
#[pyfunction]
fn robust_intersection(
    data: &PyDataset,
    config: &PyConfig,
    runs: usize,
    fraction: f64,
) -> PyResult<(Vec<usize>, Vec<PyPfaResult>)> {
    let r = pfa_core::robust_intersection(&data.0, &config.0, runs, fraction).map_err(py_err)?;
    Ok((
        to_ids(&r.intersection),
        r.runs.into_iter().map(PyPfaResult).collect(),
    ))
}

/// Synthetic dataset: example1..example4, or "dag" with `bases` base and
/// `derived` derived variables.
#[pyfunction]
#[pyo3(signature = (scenario, n = 5000, seed = 0, bases = 50, derived = 450))]
fn synth(scenario: &str, n: usize, seed: u64, bases: usize, derived: usize) -> PyResult<PyDataset> {
    let scenario = match scenario {
        "dag" => Scenario::Custom(DagSpec::random(bases, derived, seed)),
        name => name.parse().map_err(py_err)?,
    };
    pfa_core::generate(&SynthSpec::new(scenario, n, seed))
        .map(PyDataset)
        .map_err(py_err)
}

/// Bin index of every value, bins holding at least `nu` points each.
#[pyfunction]
fn discretize(values: Vec<f64>, nu: usize) -> PyResult<Vec<u32>> {
    pfa_core::discretize(&values, nu)
        .map(|f| f.bins().to_vec())
        .map_err(py_err)
}

/// Chi-square independence test of two raw variables after binning.
#[pyfunction]
#[pyo3(signature = (a, b, nu, alpha = 0.01, min_expected = 5.0))]
fn independence_test<'py>(
    py: Python<'py>,
    a: Vec<f64>,
    b: Vec<f64>,
    nu: usize,
    alpha: f64,
    min_expected: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let fa = pfa_core::discretize(&a, nu).map_err(py_err)?;
    let fb = pfa_core::discretize(&b, nu).map_err(py_err)?;
    let v = pfa_core::is_independent(&fa, &fb, alpha, min_expected, DofMode::Independence)
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("chi2", v.chi2)?;
    d.set_item("dof", v.dof)?;
    d.set_item("p_value", v.p_value)?;
    d.set_item("independent", v.independent)?;
    d.set_item("guard_ok", v.guard_ok)?;
    Ok(d)
}

#[pyfunction]
fn chi_square_p_value(chi2: f64, dof: u64) -> PyResult<f64> {
    pfa_core::chi_square_p_value(chi2, dof).map_err(py_err)
}

fn graph(n_nodes: usize, edges: Vec<(usize, usize)>) -> PyResult<Graph> {
    if let Some(&(a, b)) = edges
        .iter()
        .find(|&&(a, b)| a == 0 || b == 0 || a > n_nodes || b > n_nodes || a == b)
    {
        return Err(PyValueError::new_err(format!(
            "edge ({a}, {b}) is not a pair of distinct nodes in 1..={n_nodes}"
        )));
    }
    Ok(Graph::from_edges(
        (1..=n_nodes).map(VariableId),
        edges
            .into_iter()
            .map(|(a, b)| (VariableId(a), VariableId(b))),
    ))
}

/// Minimum vertex cut of the graph on nodes 1..=n_nodes.
#[pyfunction]
fn min_node_cut(n_nodes: usize, edges: Vec<(usize, usize)>) -> PyResult<Vec<usize>> {
    pfa_core::min_node_cut(&graph(n_nodes, edges)?)
        .map(|c| to_ids(&c))
        .map_err(py_err)
}

/// Dissects the graph on nodes 1..=n_nodes; returns the complete subgraphs
/// and the removed cuts in order.
#[pyfunction]
#[pyo3(signature = (n_nodes, edges, tie_seed = None))]
fn dissect(
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    tie_seed: Option<u64>,
) -> PyResult<(Subgraphs, Subgraphs)> {
    let g = graph(n_nodes, edges)?;
    let ties = match tie_seed {
        Some(seed) => pfa_core::dissect::TieBreak::shuffled(g.nodes(), seed),
        None => pfa_core::dissect::TieBreak::by_id(),
    };
    let r = pfa_core::dissect::dissect_with(&g, &ties);
    Ok((
        r.complete_subgraphs.iter().map(to_ids).collect(),
        r.removals.iter().map(|x| to_ids(&x.nodes)).collect(),
    ))
}

#[pymodule]
fn pfa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyPfaResult>()?;
    m.add_function(wrap_pyfunction!(run_pfa, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(robust_intersection, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(discretize, m)?)?;
    m.add_function(wrap_pyfunction!(independence_test, m)?)?;
    m.add_function(wrap_pyfunction!(chi_square_p_value, m)?)?;
    m.add_function(wrap_pyfunction!(min_node_cut, m)?)?;
    m.add_function(wrap_pyfunction!(dissect, m)?)?;
    Ok(())
}
