use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{Label, LabeledWordSet};
use crate::classifiers::{
    fit_distance, fit_linear, fit_tree, DistanceKind, DistanceModel, LabeledSet, LinearMethod,
    LinearModel, Orientation, Prediction, QuantizerKind, ThresholdRule, TreeModel, TreeParams,
};
use crate::error::{Error, Result};
use crate::features::{builtin_map, FeatureMap};
use crate::freegroup::{is_minimal, CyclicWord};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Regression,
    Fisher,
    Svm,
    Tree,
    Distance,
    FlatDistance,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(Method::Regression),
            "fisher" => Ok(Method::Fisher),
            "svm" => Ok(Method::Svm),
            "tree" => Ok(Method::Tree),
            "distance" | "mahalanobis" => Ok(Method::Distance),
            "flat" | "flat-distance" => Ok(Method::FlatDistance),
            _ => Err(Error::InvalidArgument(format!("unknown classifier {s:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Regression => "regression",
            Method::Fisher => "fisher",
            Method::Svm => "svm",
            Method::Tree => "tree",
            Method::Distance => "distance",
            Method::FlatDistance => "flat-distance",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub features: String,
    pub method: Method,
    /// Quantizer kind and interval count for linear methods.
    pub quantizer: Option<(QuantizerKind, usize)>,
    /// Fixed threshold `Θ` for linear methods: scores `≤ Θ` are minimal.
    pub threshold: Option<f64>,
    pub tree: TreeParams,
    pub seed: u64,
}

impl Default for PipelineConfig {
    /// `f6`, regression, 100 equal-interval quantizing intervals.
    fn default() -> Self {
        PipelineConfig {
            features: "f6".into(),
            method: Method::Regression,
            quantizer: Some((QuantizerKind::EqualInterval, 100)),
            threshold: None,
            tree: TreeParams::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn with_features(features: impl Into<String>) -> Self {
        PipelineConfig {
            features: features.into(),
            ..PipelineConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Linear(LinearModel),
    Tree(TreeModel),
    Distance(DistanceModel),
}

impl Model {
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        match self {
            Model::Linear(m) => m.predict(x),
            Model::Tree(m) => m.predict(x),
            Model::Distance(m) => m.predict(x),
        }
    }
}

/// Anything that labels cyclic words as minimal (class 1) or not (class 2).
pub trait WordClassifier: Sync {
    fn classify(&self, w: &CyclicWord) -> Result<Prediction>;
}

/// Labels by [`is_minimal`]; the score is the class index.
#[derive(Clone, Copy, Debug, Default)]
pub struct OracleClassifier;

impl WordClassifier for OracleClassifier {
    fn classify(&self, w: &CyclicWord) -> Result<Prediction> {
        let label = if is_minimal(w) { 1 } else { 2 };
        Ok(Prediction {
            label,
            score: label as f64 - 1.0,
        })
    }
}

/// Feature map, fitted model and decision rule, stored as versioned JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub schema_version: u32,
    pub feature_map: String,
    pub rank: usize,
    pub model: Model,
    #[serde(skip)]
    map: Option<FeatureMap>,
}

impl PartialEq for TrainedPipeline {
    fn eq(&self, other: &Self) -> bool {
        self.schema_version == other.schema_version
            && self.feature_map == other.feature_map
            && self.rank == other.rank
            && self.model == other.model
    }
}

impl TrainedPipeline {
    pub fn new(feature_map: &FeatureMap, model: Model) -> Self {
        TrainedPipeline {
            schema_version: SCHEMA_VERSION,
            feature_map: feature_map.name().to_string(),
            rank: feature_map.rank(),
            model,
            map: Some(feature_map.clone()),
        }
    }

    pub fn feature_map(&self) -> Result<FeatureMap> {
        match &self.map {
            Some(m) => Ok(m.clone()),
            None => builtin_map(&self.feature_map, self.rank),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let version = raw.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion(version));
        }
        let mut p: TrainedPipeline = serde_json::from_value(raw)?;
        p.map = Some(builtin_map(&p.feature_map, p.rank)?);
        Ok(p)
    }

    /// Discriminant value and label for each word.
    pub fn predict_many(&self, words: &[CyclicWord]) -> Result<Vec<Prediction>> {
        let map = self.feature_map()?;
        map.feature_matrix(words)?
            .iter()
            .map(|x| self.model.predict(x))
            .collect()
    }
}

impl WordClassifier for TrainedPipeline {
    fn classify(&self, w: &CyclicWord) -> Result<Prediction> {
        let x = match &self.map {
            Some(m) => m.feature_vector(w)?,
            None => builtin_map(&self.feature_map, self.rank)?.feature_vector(w)?,
        };
        self.model.predict(&x)
    }
}

/// Feature rows and class indices of a word set.
pub fn labeled_features(map: &FeatureMap, set: &LabeledWordSet) -> Result<LabeledSet> {
    let rows = map.feature_matrix(&set.words())?;
    LabeledSet::new(rows, set.classes(), 2)
}

/// Fits a classifier on an already extracted feature set.
pub fn fit_model(data: &LabeledSet, cfg: &PipelineConfig) -> Result<Model> {
    Ok(match cfg.method {
        Method::Regression | Method::Fisher | Method::Svm => {
            let method = match cfg.method {
                Method::Regression => LinearMethod::Regression,
                Method::Fisher => LinearMethod::Fisher,
                _ => LinearMethod::Svm,
            };
            let mut m = fit_linear(data, method)?;
            if let Some(theta) = cfg.threshold {
                m.rule = ThresholdRule {
                    theta,
                    orientation: Orientation::Class1Left,
                };
            } else if let Some((kind, bins)) = cfg.quantizer {
                m.quantize(data, bins, kind)?;
            }
            Model::Linear(m)
        }
        Method::Tree => Model::Tree(fit_tree(data, &cfg.tree)?),
        Method::Distance => Model::Distance(fit_distance(data, DistanceKind::Mahalanobis)?),
        Method::FlatDistance => Model::Distance(fit_distance(data, DistanceKind::Flat)?),
    })
}

/// Extracts features, fits the classifier and its decision rule.
pub fn train_pipeline(train: &LabeledWordSet, cfg: &PipelineConfig) -> Result<TrainedPipeline> {
    if train.is_empty() {
        return Err(Error::EmptyInput("training set has no words"));
    }
    for label in [Label::Minimal, Label::Nonminimal] {
        if train.count(label) == 0 {
            return Err(Error::EmptyClass(label.class()));
        }
    }
    let map = builtin_map(&cfg.features, train.rank)?;
    let data = labeled_features(&map, train)?;
    let model = fit_model(&data, cfg)?;
    Ok(TrainedPipeline::new(&map, model))
}
