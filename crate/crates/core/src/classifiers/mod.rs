//! Classical classifiers written from scratch: principal-component flats,
//! distance discriminants, linear discriminants (regression, Fisher, hard
//! margin support vector), quantizers, decision trees and K-means.
//!
//! Class labels are `1..=M`. Two-class discriminants send `score ≤ θ` to the
//! left class of their [`Orientation`].

mod distance;
mod flat;
mod kmeans;
mod linear;
mod quantizer;
mod threshold;
mod tree;

use serde::{Deserialize, Serialize};

pub use distance::{fit_distance, mahalanobis_score, DistanceKind, DistanceModel, DistanceVariant};
pub use flat::{classify_by_flats, fit_flat, FlatModel, FlatOutcome};
pub use kmeans::{kmeans, KMeansInit, KMeansModel};
pub use linear::{fisher_scatter, fit_linear, FisherScatter, LinearMethod, LinearModel};
pub use quantizer::{build_quantizer, Quantizer, QuantizerKind};
pub use threshold::{choose_threshold, Orientation, ThresholdRule};
pub use tree::{chi_square_cutoff, fit_tree, node_stats, TreeModel, TreeNode, TreeParams};

use crate::error::{Error, Result};

/// Feature rows with class labels in `1..=classes`.
#[derive(Clone, Debug)]
pub struct LabeledSet {
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    classes: usize,
}

impl LabeledSet {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("labeled set has no samples"));
        }
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                actual: labels.len(),
            });
        }
        let d = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: r.len(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l == 0 || l > classes) {
            return Err(Error::InvalidArgument(format!(
                "label {l} outside 1..={classes}"
            )));
        }
        Ok(LabeledSet {
            rows,
            labels,
            classes,
        })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    /// Rows belonging to class `c`.
    pub fn class_rows(&self, c: usize) -> Vec<&Vec<f64>> {
        self.rows
            .iter()
            .zip(&self.labels)
            .filter(|(_, &l)| l == c)
            .map(|(r, _)| r)
            .collect()
    }

    pub(crate) fn require_two_classes(&self) -> Result<()> {
        if self.classes != 2 {
            return Err(Error::InvalidArgument(format!(
                "two-class method applied to {} classes",
                self.classes
            )));
        }
        for c in 1..=2 {
            if !self.labels.contains(&c) {
                return Err(Error::EmptyClass(c));
            }
        }
        Ok(())
    }
}

/// How a scalar discriminant value becomes a class label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionRule {
    Threshold(ThresholdRule),
    Quantized(Quantizer),
}

impl DecisionRule {
    pub fn label(&self, score: f64) -> usize {
        match self {
            DecisionRule::Threshold(t) => t.label(score),
            DecisionRule::Quantized(q) => q.label(score),
        }
    }
}

/// A label together with the discriminant value it came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub label: usize,
    pub score: f64,
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: x.len(),
        });
    }
    Ok(())
}

/// Fraction of `labels` that `rule` gets wrong on `scores`.
pub fn rule_error(rule: &DecisionRule, scores: &[f64], labels: &[usize]) -> f64 {
    let wrong = scores
        .iter()
        .zip(labels)
        .filter(|(s, &l)| rule.label(**s) != l)
        .count();
    wrong as f64 / scores.len().max(1) as f64
}
