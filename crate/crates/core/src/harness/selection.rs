use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledWordSet;
use super::pipeline::{fit_model, PipelineConfig};
use crate::classifiers::LabeledSet;
use crate::error::{Error, Result};
use crate::features::{FeatureMap, Pattern};

/// Selection stops once the best candidate gains less than this.
pub const MIN_IMPROVEMENT: f64 = 0.001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Indices into the pool, in acceptance order.
    pub indices: Vec<usize>,
    pub patterns: Vec<String>,
    /// Validation accuracy after each accepted pattern.
    pub accuracies: Vec<f64>,
}

impl Selection {
    /// Name of a feature map holding the selected patterns.
    pub fn map_name(&self) -> String {
        format!("custom:{}", self.patterns.join(","))
    }
}

fn columns(rows: &[Vec<f64>], cols: &[usize]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect()
}

/// Forward selection: repeatedly adds the pool pattern whose retrained
/// pipeline has the best validation accuracy, ties to the earlier pattern,
/// until the gain drops below [`MIN_IMPROVEMENT`], the pool is exhausted or
/// `max_features` are chosen. Candidates whose model cannot be fitted are
/// skipped.
pub fn greedy_feature_selection(
    pool: &[Pattern],
    train: &LabeledWordSet,
    validation: &LabeledWordSet,
    cfg: &PipelineConfig,
    max_features: Option<usize>,
) -> Result<Selection> {
    if pool.is_empty() {
        return Err(Error::EmptyInput("feature pool is empty"));
    }
    let map = FeatureMap::new("pool", train.rank, pool.to_vec())?;
    let train_rows = map.feature_matrix(&train.words())?;
    let val_rows = map.feature_matrix(&validation.words())?;
    let train_labels = train.classes();
    let val_labels = validation.classes();
    let limit = max_features.unwrap_or(pool.len()).min(pool.len());

    let mut chosen: Vec<usize> = Vec::new();
    let mut accuracies = Vec::new();
    let mut current = 0.0;
    while chosen.len() < limit {
        let scored: Vec<Option<f64>> = (0..pool.len())
            .into_par_iter()
            .map(|j| {
                if chosen.contains(&j) {
                    return None;
                }
                let cols: Vec<usize> = chosen.iter().copied().chain([j]).collect();
                let data = LabeledSet::new(columns(&train_rows, &cols), train_labels.clone(), 2).ok()?;
                let model = match fit_model(&data, cfg) {
                    Ok(m) => m,
                    Err(e) => {
                        log::debug!("candidate {} skipped: {e}", pool[j]);
                        return None;
                    }
                };
                let correct = columns(&val_rows, &cols)
                    .iter()
                    .zip(&val_labels)
                    .filter(|(x, &l)| model.predict(x).is_ok_and(|p| p.label == l))
                    .count();
                Some(correct as f64 / val_labels.len().max(1) as f64)
            })
            .collect();
        let mut best: Option<(usize, f64)> = None;
        for (j, acc) in scored.into_iter().enumerate() {
            if let Some(acc) = acc {
                if best.is_none_or(|(_, b)| acc > b) {
                    best = Some((j, acc));
                }
            }
        }
        let Some((j, acc)) = best else { break };
        if acc - current < MIN_IMPROVEMENT {
            break;
        }
        log::info!("selected {} (validation accuracy {acc:.4})", pool[j]);
        chosen.push(j);
        accuracies.push(acc);
        current = acc;
    }
    Ok(Selection {
        patterns: chosen.iter().map(|&j| pool[j].to_string()).collect(),
        indices: chosen,
        accuracies,
    })
}
