use serde::{Deserialize, Serialize};

use super::quantizer::{build_quantizer, Quantizer, QuantizerKind};
use super::threshold::{choose_threshold, ThresholdRule};
use super::{check_dim, LabeledSet, Prediction};
use crate::error::{Error, Result};
use crate::numerics::{
    least_squares_with_ridge, matrix_from_rows, mean_and_covariance, qp_hard_margin, solve_psd,
    RealMatrix, RealVector,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearMethod {
    Regression,
    Fisher,
    Svm,
}

/// Discriminant `f(x) = v'x` with a threshold rule and an optional quantizer
/// that takes precedence when present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub method: LinearMethod,
    pub weights: Vec<f64>,
    pub rule: ThresholdRule,
    #[serde(default)]
    pub quantizer: Option<Quantizer>,
    #[serde(default)]
    pub ridge: Option<f64>,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(self.weights.iter().zip(x).map(|(v, x)| v * x).sum())
    }

    pub fn label_of_score(&self, score: f64) -> usize {
        match &self.quantizer {
            Some(q) => q.label(score),
            None => self.rule.label(score),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let score = self.score(x)?;
        Ok(Prediction {
            label: self.label_of_score(score),
            score,
        })
    }

    /// Builds an `m`-interval quantizer on the training scores of `set`.
    pub fn quantize(&mut self, set: &LabeledSet, m: usize, kind: QuantizerKind) -> Result<()> {
        let scores = training_scores(&self.weights, set)?;
        self.quantizer = Some(build_quantizer(&scores, set.labels(), m, kind)?);
        Ok(())
    }
}

fn training_scores(weights: &[f64], set: &LabeledSet) -> Result<Vec<f64>> {
    set.rows()
        .iter()
        .map(|r| {
            check_dim(weights.len(), r)?;
            Ok(weights.iter().zip(r).map(|(v, x)| v * x).sum())
        })
        .collect()
}

/// Scatter matrices of a two-class set with priors `P_i = N_i / N`.
#[derive(Clone, Debug)]
pub struct FisherScatter {
    pub mean1: RealVector,
    pub mean2: RealVector,
    pub within: RealMatrix,
    pub between: RealMatrix,
    pub total: RealMatrix,
}

pub fn fisher_scatter(set: &LabeledSet) -> Result<FisherScatter> {
    set.require_two_classes()?;
    let vecs = |c: usize| -> Vec<RealVector> {
        set.class_rows(c).into_iter().map(|r| RealVector::from_row_slice(r)).collect()
    };
    let (x1, x2) = (vecs(1), vecs(2));
    let n = (x1.len() + x2.len()) as f64;
    let (p1, p2) = (x1.len() as f64 / n, x2.len() as f64 / n);
    let (mean1, c1) = mean_and_covariance(&x1)?;
    let (mean2, c2) = mean_and_covariance(&x2)?;
    let within = &c1 * p1 + &c2 * p2;
    let diff = &mean1 - &mean2;
    let between = &diff * diff.transpose() * (p1 * p2);
    let all: Vec<RealVector> = x1.into_iter().chain(x2).collect();
    let (_, total) = mean_and_covariance(&all)?;
    Ok(FisherScatter {
        mean1,
        mean2,
        within,
        between,
        total,
    })
}

/// Fits `v` by the chosen method and the error-minimizing threshold.
///
/// Regression targets are 0 for class 1 and 1 for class 2; Fisher uses
/// `v = S_w⁻¹(μ₁ − μ₂)`; the support vector method solves the hard-margin
/// program with `y = +1` for class 1.
pub fn fit_linear(set: &LabeledSet, method: LinearMethod) -> Result<LinearModel> {
    set.require_two_classes()?;
    let (weights, ridge) = match method {
        LinearMethod::Regression => {
            let a = matrix_from_rows(set.rows())?;
            let b = RealVector::from_iterator(
                set.len(),
                set.labels().iter().map(|&l| if l == 1 { 0.0 } else { 1.0 }),
            );
            least_squares_with_ridge(&a, &b)?
        }
        LinearMethod::Fisher => {
            let s = fisher_scatter(set)?;
            solve_psd(&s.within, &(&s.mean1 - &s.mean2))?
        }
        LinearMethod::Svm => {
            let signed: Vec<Vec<f64>> = set
                .rows()
                .iter()
                .zip(set.labels())
                .map(|(r, &l)| {
                    let y = if l == 1 { 1.0 } else { -1.0 };
                    r.iter().map(|v| y * v).collect()
                })
                .collect();
            (qp_hard_margin(&matrix_from_rows(&signed)?)?, None)
        }
    };
    if let Some(r) = ridge {
        log::warn!("{method:?}: singular system, ridge {r:e} added");
    }
    let weights: Vec<f64> = weights.iter().copied().collect();
    if weights.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument(format!(
            "{method:?} produced a zero weight vector"
        )));
    }
    let scores = training_scores(&weights, set)?;
    let (rule, _) = choose_threshold(&scores, set.labels())?;
    Ok(LinearModel {
        method,
        weights,
        rule,
        quantizer: None,
        ridge,
    })
}
