//! Python bindings for `whitehead_pr`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use whitehead_pr::classifiers::QuantizerKind;
use whitehead_pr::features::builtin_map;
use whitehead_pr::freegroup::{self, infer_rank, reducing_nielsen_moves, Word};
use whitehead_pr::harness::{
    self, ClusterConfig, ClusterInit, DatasetKind, DatasetSpec, LabeledWordSet, Method, PipelineConfig,
    ReducerCenters, TrainedPipeline, WordClassifier,
};

fn err(e: whitehead_pr::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse(word: &str, rank: Option<usize>) -> PyResult<freegroup::CyclicWord> {
    let rank = match rank {
        Some(r) => r,
        None => infer_rank(word).map_err(err)?.max(2),
    };
    Ok(Word::parse(word, rank).map_err(err)?.cyclic_reduce().0)
}

/// A cyclic word in canonical form (least rotation).
#[pyclass(name = "CyclicWord", frozen)]
struct PyCyclicWord(freegroup::CyclicWord);

#[pymethods]
impl PyCyclicWord {
    /// Parses a word over `a, b, ...` with uppercase inverses and cyclically reduces it.
    #[new]
    #[pyo3(signature = (word, rank=None))]
    fn new(word: &str, rank: Option<usize>) -> PyResult<Self> {
        Ok(PyCyclicWord(parse(word, rank)?))
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("CyclicWord('{}', rank={})", self.0, self.0.rank())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.0.hash(&mut h);
        h.finish()
    }

    fn is_minimal(&self) -> bool {
        freegroup::is_minimal(&self.0)
    }

    /// Minimal word and the automorphisms applied, in order.
    fn minimize(&self) -> (PyCyclicWord, Vec<String>) {
        let (m, chain) = freegroup::minimize(&self.0);
        (PyCyclicWord(m), chain.steps().iter().map(|t| t.to_string()).collect())
    }

    /// Names of the length-reducing Nielsen moves (rank 2).
    fn reducing_moves(&self) -> PyResult<Vec<String>> {
        Ok(reducing_nielsen_moves(&self.0)
            .map_err(err)?
            .into_iter()
            .map(|m| m.name().to_string())
            .collect())
    }

    /// Feature vector under a named map (`f0`..`f6`, `fstar`, `pool:1-3`, `custom:...`).
    #[pyo3(signature = (features="f6"))]
    fn features(&self, features: &str) -> PyResult<Vec<f64>> {
        let map = builtin_map(features, self.0.rank()).map_err(err)?;
        Ok(map.feature_vector(&self.0).map_err(err)?.into_inner())
    }
}

/// Words with minimal/nonminimal labels.
#[pyclass(name = "Dataset", frozen)]
struct PyDataset(LabeledWordSet);

#[pymethods]
impl PyDataset {
    #[staticmethod]
    #[pyo3(signature = (kind, max_len, per_len=10, size=5000, seed=0, rank=2))]
    fn generate(kind: &str, max_len: usize, per_len: usize, size: usize, seed: u64, rank: usize) -> PyResult<Self> {
        let kind: DatasetKind = kind.parse().map_err(err)?;
        let spec = DatasetSpec {
            per_length: per_len,
            size,
            ..DatasetSpec::new(kind, rank, max_len, seed)
        };
        Ok(PyDataset(harness::generate_dataset(&spec).map_err(err)?))
    }

    #[staticmethod]
    fn from_tsv(text: &str) -> PyResult<Self> {
        Ok(PyDataset(LabeledWordSet::read_tsv(text.as_bytes()).map_err(err)?))
    }

    fn to_tsv(&self) -> String {
        self.0.to_tsv_string()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.0.rank
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn words(&self) -> Vec<String> {
        self.0.records.iter().map(|r| r.word.to_string()).collect()
    }

    /// `"min"` or `"nonmin"` per word.
    fn labels(&self) -> Vec<&'static str> {
        self.0.records.iter().map(|r| r.label.as_str()).collect()
    }

    /// Keeps the words with the given label.
    fn filter(&self, label: &str) -> PyResult<Self> {
        Ok(PyDataset(self.0.filter(label.parse().map_err(err)?)))
    }
}

/// Feature map plus trained classifier.
#[pyclass(name = "Pipeline", frozen)]
struct PyPipeline(TrainedPipeline);

fn quantizer_kind(name: &str) -> PyResult<QuantizerKind> {
    match name {
        "equal" => Ok(QuantizerKind::EqualInterval),
        "prob" => Ok(QuantizerKind::EqualProbability),
        "minerr" => Ok(QuantizerKind::MinError),
        _ => Err(PyValueError::new_err(format!("unknown quantizer {name:?}"))),
    }
}

#[pymethods]
impl PyPipeline {
    #[staticmethod]
    #[pyo3(signature = (train, features="f6", model="regression", quantizer="equal", bins=100))]
    fn train(train: &PyDataset, features: &str, model: &str, quantizer: &str, bins: usize) -> PyResult<Self> {
        let method: Method = model.parse().map_err(err)?;
        let cfg = PipelineConfig {
            features: features.to_string(),
            method,
            quantizer: Some((quantizer_kind(quantizer)?, bins)),
            ..PipelineConfig::default()
        };
        Ok(PyPipeline(harness::train_pipeline(&train.0, &cfg).map_err(err)?))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyPipeline(TrainedPipeline::from_json(text).map_err(err)?))
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    /// `(label, score)` with label `"min"` or `"nonmin"`.
    fn classify(&self, word: &str) -> PyResult<(&'static str, f64)> {
        let w = parse(word, Some(self.0.rank))?;
        let p = self.0.classify(&w).map_err(err)?;
        Ok((if p.label == 1 { "min" } else { "nonmin" }, p.score))
    }

    /// Accuracy per length stratum, confusion matrix and histogram overlap.
    #[pyo3(signature = (test, strata=vec![0, 4, 100], hist_bins=50))]
    fn evaluate<'py>(
        &self,
        py: Python<'py>,
        test: &PyDataset,
        strata: Vec<usize>,
        hist_bins: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let r = harness::evaluate(&self.0, &test.0, &strata, hist_bins).map_err(err)?;
        let acc = PyDict::new(py);
        for s in &r.strata {
            acc.set_item(s.min_length, s.accuracy)?;
        }
        let out = PyDict::new(py);
        out.set_item("accuracy", acc)?;
        out.set_item("confusion", r.confusion.iter().map(|row| row.to_vec()).collect::<Vec<_>>())?;
        out.set_item("overlap", r.histogram.overlap_mass())?;
        out.set_item("wrong_side_of_half", r.mass_beyond(0.5))?;
        Ok(out)
    }
}

/// Runs the K-means reducing-move experiment on nonminimal rank-2 words.
/// Returns the per-cluster report and the centers as JSON.
#[pyfunction]
#[pyo3(signature = (data, k=4, features="f2", init="estimated", seed=0))]
fn cluster<'py>(
    py: Python<'py>,
    data: &PyDataset,
    k: usize,
    features: &str,
    init: &str,
    seed: u64,
) -> PyResult<(Bound<'py, PyDict>, String)> {
    let init: ClusterInit = init.parse().map_err(err)?;
    let map = builtin_map(features, data.0.rank).map_err(err)?;
    let cfg = ClusterConfig {
        k,
        ..ClusterConfig::new(init, seed)
    };
    let out = harness::clustering_experiment(&data.0, &map, &cfg).map_err(err)?;
    let report = PyDict::new(py);
    report.set_item("avg_r_max", out.report.avg_r_max)?;
    report.set_item("max_r_max", out.report.max_r_max)?;
    report.set_item("min_r_max", out.report.min_r_max)?;
    report.set_item("sizes", out.report.clusters.iter().map(|c| c.size).collect::<Vec<_>>())?;
    report.set_item(
        "best_moves",
        out.report.clusters.iter().map(|c| c.best_move.name()).collect::<Vec<_>>(),
    )?;
    Ok((report, out.centers.to_json().map_err(err)?))
}

/// Nielsen move predicted to shorten `word`, from centers JSON produced by `cluster`.
#[pyfunction]
fn predict_reducer(word: &str, centers: &str) -> PyResult<&'static str> {
    let centers = ReducerCenters::from_json(centers).map_err(err)?;
    let w = parse(word, Some(2))?;
    Ok(harness::predict_reducer(&w, &centers).map_err(err)?.name())
}

/// Shortcut for `CyclicWord(word).minimize()` returning strings.
#[pyfunction]
#[pyo3(signature = (word, rank=None))]
fn minimize(word: &str, rank: Option<usize>) -> PyResult<(String, Vec<String>)> {
    let (m, steps) = PyCyclicWord::new(word, rank)?.minimize();
    Ok((m.0.to_string(), steps))
}

#[pyfunction]
#[pyo3(signature = (word, rank=None))]
fn is_minimal(word: &str, rank: Option<usize>) -> PyResult<bool> {
    Ok(freegroup::is_minimal(&parse(word, rank)?))
}

/// Component names of a feature map.
#[pyfunction]
#[pyo3(signature = (features, rank=2))]
fn feature_names(features: &str, rank: usize) -> PyResult<Vec<String>> {
    Ok(builtin_map(features, rank).map_err(err)?.component_names())
}

#[pymodule]
fn pywhitehead(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCyclicWord>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyPipeline>()?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(predict_reducer, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(is_minimal, m)?)?;
    m.add_function(wrap_pyfunction!(feature_names, m)?)?;
    Ok(())
}
