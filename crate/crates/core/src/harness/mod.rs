//! Experiment harness: labelled word datasets, training and evaluation
//! pipelines, greedy feature selection and the Nielsen-move clustering
//! experiment.

mod clustering;
mod dataset;
mod evaluate;
mod pipeline;
mod selection;

pub use clustering::{
    cluster_report, clustering_experiment, estimate_initial_centers, predict_reducer,
    predict_reducer_with, ClusterConfig, ClusterInit, ClusterOutcome, ClusterReport, ClusterStats,
    ReducerCenters, CENTERS_SCHEMA_VERSION,
};
pub use dataset::{
    generate_dataset, DatasetKind, DatasetSpec, Label, LabeledWordSet, WordRecord,
    PRIMITIVE_STEP_CAP, SUBSTITUTION_DRAWS,
};
pub use evaluate::{
    evaluate, score_histogram, EvaluationReport, Histogram, HistogramBin, StratumAccuracy,
    DEFAULT_STRATA,
};
pub use pipeline::{
    fit_model, labeled_features, train_pipeline, Method, Model, OracleClassifier, PipelineConfig,
    TrainedPipeline, WordClassifier, SCHEMA_VERSION,
};
pub use selection::{greedy_feature_selection, Selection, MIN_IMPROVEMENT};
