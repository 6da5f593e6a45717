//! Python bindings. Tables, matrices, graphs, trees and partitions are
//! wrapped as classes; reports come back as plain dicts, lists and tuples.

use featnet::community as comm;
use featnet::correlation::{self as corr, CorrelationMode};
use featnet::dataset::{self, Format, PartitionSelector};
use featnet::evaluation::{self as ev, FeatureSubset, GbtParams, SplitSpec};
use featnet::graph::{self, Edge, GammaMethod};
use featnet::pipeline::{self, PipelineConfig};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: featnet::Error) -> PyErr {
    match e {
        featnet::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = featnet::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

#[pyclass(name = "FeatureTable", module = "featnet", frozen)]
struct PyFeatureTable {
    inner: dataset::FeatureTable,
}

#[pymethods]
impl PyFeatureTable {
    #[new]
    #[pyo3(signature = (feature_names, rows, labels, source = "python"))]
    fn new(feature_names: Vec<String>, rows: Vec<Vec<i8>>, labels: Vec<i8>, source: &str) -> PyResult<Self> {
        dataset::FeatureTable::from_rows(feature_names, rows, labels, source)
            .map(|inner| PyFeatureTable { inner })
            .map_err(to_py)
    }

    /// Loads a CSV or ARFF file; `format` is "csv", "arff" or "auto".
    #[staticmethod]
    #[pyo3(signature = (path, format = "auto"))]
    fn load(path: &str, format: &str) -> PyResult<Self> {
        let format: Format = parse(format)?;
        dataset::load_dataset(path, format)
            .map(|inner| PyFeatureTable { inner })
            .map_err(to_py)
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names().to_vec()
    }

    #[getter]
    fn labels(&self) -> Vec<i8> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    fn rows(&self) -> Vec<Vec<i8>> {
        self.inner.rows().map(<[i8]>::to_vec).collect()
    }

    /// Rows of one class ("legitimate", "phishing") or all of them.
    fn partition(&self, which: &str) -> PyResult<Self> {
        let sel: PartitionSelector = parse(which)?;
        dataset::partition(&self.inner, sel)
            .map(|inner| PyFeatureTable { inner })
            .map_err(to_py)
    }

    fn save_csv(&self, path: &str) -> PyResult<()> {
        self.inner.save_csv(path).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }

    fn __repr__(&self) -> String {
        format!(
            "FeatureTable({} rows x {} features, source={:?})",
            self.inner.n_rows(),
            self.inner.n_features(),
            self.inner.source()
        )
    }
}

#[pyclass(name = "CorrelationMatrix", module = "featnet", frozen)]
struct PyCorrelationMatrix {
    inner: corr::CorrelationMatrix,
}

fn matrix_rows(m: &corr::LabeledMatrix) -> Vec<Vec<f64>> {
    (0..m.size()).map(|i| m.row(i).to_vec()).collect()
}

#[pymethods]
impl PyCorrelationMatrix {
    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.inner.matrix)
    }

    /// `(feature, reason)` for every constant column.
    #[getter]
    fn warnings(&self) -> Vec<(String, String)> {
        self.inner
            .warnings
            .iter()
            .map(|w| (w.feature.clone(), w.reason.clone()))
            .collect()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.names().len();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!("index out of range for {n} features")));
        }
        Ok(self.inner.get(i, j))
    }

    /// sqrt(2 (1 - rho)) per entry.
    fn distance(&self) -> Vec<Vec<f64>> {
        matrix_rows(&corr::to_distance(&self.inner).0)
    }

    /// exp(-distance) per entry.
    fn similarity(&self) -> Vec<Vec<f64>> {
        matrix_rows(&corr::to_similarity(&corr::to_distance(&self.inner)).0)
    }

    /// Complete graph weighted by similarity.
    fn graph(&self) -> PyResult<PySimilarityGraph> {
        let sim = corr::to_similarity(&corr::to_distance(&self.inner));
        graph::build_graph(&sim)
            .map(|inner| PySimilarityGraph { inner })
            .map_err(to_py)
    }
}

#[pyclass(name = "SimilarityGraph", module = "featnet", frozen)]
struct PySimilarityGraph {
    inner: graph::SimilarityGraph,
}

#[pymethods]
impl PySimilarityGraph {
    /// `edges` holds `(a, b, weight)` with node indices.
    #[new]
    fn new(nodes: Vec<String>, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let edges = edges.into_iter().map(|(a, b, weight)| Edge { a, b, weight }).collect();
        graph::SimilarityGraph::new(nodes, edges)
            .map(|inner| PySimilarityGraph { inner })
            .map_err(to_py)
    }

    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.inner.nodes().to_vec()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges().iter().map(|e| (e.a, e.b, e.weight)).collect()
    }

    #[getter]
    fn total_weight(&self) -> f64 {
        self.inner.total_weight()
    }
}

#[pyclass(name = "SpanningTree", module = "featnet", frozen)]
struct PySpanningTree {
    inner: graph::SpanningTree,
}

#[pymethods]
impl PySpanningTree {
    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.inner.nodes().to_vec()
    }

    /// `(a, b, weight)` by node name.
    #[getter]
    fn edges(&self) -> Vec<(String, String, f64)> {
        let names = self.inner.nodes();
        self.inner
            .edges()
            .iter()
            .map(|e| (names[e.a].clone(), names[e.b].clone(), e.weight))
            .collect()
    }

    #[getter]
    fn total_weight(&self) -> f64 {
        self.inner.total_weight()
    }

    #[getter]
    fn is_unique(&self) -> bool {
        self.inner.is_unique()
    }

    fn degrees(&self) -> Vec<(String, usize)> {
        graph::degrees(&self.inner)
    }

    /// `(k, count, P(k))` rows.
    fn degree_distribution(&self) -> Vec<(usize, usize, f64)> {
        graph::degree_distribution(&self.inner)
            .entries
            .iter()
            .map(|e| (e.k, e.count, e.pk))
            .collect()
    }

    /// Power-law exponent of the degree distribution.
    #[pyo3(signature = (method = "loglog_ols"))]
    fn gamma(&self, method: &str) -> PyResult<f64> {
        let method: GammaMethod = parse(method)?;
        graph::estimate_gamma(&graph::degree_distribution(&self.inner), method)
            .map(|g| g.gamma)
            .map_err(to_py)
    }

    fn to_dot(&self, name: &str, partition: &PyCommunityPartition) -> PyResult<String> {
        let hubs = graph::find_hubs(&self.inner, &partition.inner, graph::DEFAULT_HUB_THRESHOLD).map_err(to_py)?;
        Ok(graph::to_dot(name, &self.inner, &partition.inner, &hubs))
    }
}

#[pyclass(name = "CommunityPartition", module = "featnet", frozen)]
struct PyCommunityPartition {
    inner: comm::CommunityPartition,
}

#[pymethods]
impl PyCommunityPartition {
    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.inner.nodes.clone()
    }

    #[getter]
    fn assignment(&self) -> Vec<usize> {
        self.inner.assignment.clone()
    }

    #[getter]
    fn modularity(&self) -> f64 {
        self.inner.modularity
    }

    fn members(&self) -> Vec<Vec<String>> {
        self.inner.members()
    }

    fn community_of(&self, node: &str) -> Option<usize> {
        self.inner.community_of(node)
    }
}

#[pyfunction]
#[pyo3(signature = (table, mode = "tie_aware"))]
fn spearman(table: &PyFeatureTable, mode: &str) -> PyResult<PyCorrelationMatrix> {
    let mode: CorrelationMode = parse(mode)?;
    corr::spearman_matrix(&table.inner, mode)
        .map(|inner| PyCorrelationMatrix { inner })
        .map_err(to_py)
}

#[pyfunction]
fn maximum_spanning_tree(graph: &PySimilarityGraph) -> PyResult<PySpanningTree> {
    graph::maximum_spanning_tree(&graph.inner)
        .map(|inner| PySpanningTree { inner })
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (graph, min_gain = comm::DEFAULT_MIN_GAIN))]
fn louvain(graph: &PySimilarityGraph, min_gain: f64) -> PyResult<PyCommunityPartition> {
    comm::louvain(&graph.inner, min_gain)
        .map(|inner| PyCommunityPartition { inner })
        .map_err(to_py)
}

#[pyfunction]
fn modularity(graph: &PySimilarityGraph, assignment: Vec<usize>) -> PyResult<f64> {
    comm::modularity(&graph.inner, &assignment).map_err(to_py)
}

/// `(feature, degree, community)` for every node above the threshold.
#[pyfunction]
#[pyo3(signature = (tree, partition, threshold = graph::DEFAULT_HUB_THRESHOLD))]
fn find_hubs(
    tree: &PySpanningTree,
    partition: &PyCommunityPartition,
    threshold: usize,
) -> PyResult<Vec<(String, usize, usize)>> {
    let report = graph::find_hubs(&tree.inner, &partition.inner, threshold).map_err(to_py)?;
    Ok(report
        .entries
        .into_iter()
        .map(|e| (e.feature, e.degree, e.community))
        .collect())
}

/// Trains on a stratified split and scores the held-out rows. Pass either
/// `features` (names) or `pca_components`.
#[pyfunction]
#[pyo3(signature = (table, features = None, pca_components = None, train_fraction = 0.8, seed = 42, rounds = 200))]
fn evaluate<'py>(
    py: Python<'py>,
    table: &PyFeatureTable,
    features: Option<Vec<String>>,
    pca_components: Option<usize>,
    train_fraction: f64,
    seed: u64,
    rounds: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let subset = match (features, pca_components) {
        (Some(f), None) => FeatureSubset::named(f),
        (None, Some(k)) => FeatureSubset::pca(k),
        _ => return Err(PyValueError::new_err("pass exactly one of features or pca_components")),
    };
    let params = GbtParams {
        n_rounds: rounds,
        ..GbtParams::default()
    };
    let r = ev::evaluate(&table.inner, &subset, &SplitSpec::new(train_fraction, seed), &params)
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("accuracy", r.accuracy)?;
    d.set_item("n_train", r.n_train)?;
    d.set_item("n_test", r.n_test)?;
    d.set_item("per_class_accuracy", r.per_class_accuracy)?;
    d.set_item("confusion_matrix", r.confusion_matrix.map(|row| row.to_vec()).to_vec())?;
    Ok(d)
}

/// Runs the full analysis and returns the manifest as a JSON string. Output
/// files are written only when `out_dir` is given.
#[pyfunction]
#[pyo3(signature = (input, out_dir = None, partitions = None, corr_mode = "tie_aware", gamma_method = "loglog_ols", hub_threshold = graph::DEFAULT_HUB_THRESHOLD))]
fn run_pipeline(
    input: &str,
    out_dir: Option<&str>,
    partitions: Option<Vec<String>>,
    corr_mode: &str,
    gamma_method: &str,
    hub_threshold: usize,
) -> PyResult<String> {
    let mut cfg = PipelineConfig::new(input);
    if let Some(p) = partitions {
        cfg.partitions = p.iter().map(|s| parse(s)).collect::<PyResult<_>>()?;
    }
    cfg.correlation_mode = parse(corr_mode)?;
    cfg.gamma_method = parse(gamma_method)?;
    cfg.hub_threshold = hub_threshold;
    cfg.out_dir = out_dir.map(Into::into);
    pipeline::run_pipeline(&cfg)
        .and_then(|m| m.to_json())
        .map_err(to_py)
}

#[pymodule]
#[pyo3(name = "featnet")]
fn featnet_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFeatureTable>()?;
    m.add_class::<PyCorrelationMatrix>()?;
    m.add_class::<PySimilarityGraph>()?;
    m.add_class::<PySpanningTree>()?;
    m.add_class::<PyCommunityPartition>()?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(maximum_spanning_tree, m)?)?;
    m.add_function(wrap_pyfunction!(louvain, m)?)?;
    m.add_function(wrap_pyfunction!(modularity, m)?)?;
    m.add_function(wrap_pyfunction!(find_hubs, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
