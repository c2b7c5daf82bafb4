use serde::{Deserialize, Serialize};

use super::flat::{fit_flat, FlatModel};
use super::threshold::{choose_threshold, ThresholdRule};
use super::{check_dim, LabeledSet, Prediction};
use crate::error::Result;
use crate::numerics::{inverse_psd, mean_and_covariance, RealVector};

const FLAT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Flat,
    Mahalanobis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum DistanceVariant {
    Flat {
        class1: FlatModel,
        class2: FlatModel,
    },
    Mahalanobis {
        mean1: Vec<f64>,
        inv_cov1: Vec<Vec<f64>>,
        mean2: Vec<f64>,
        inv_cov2: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceModel {
    pub variant: DistanceVariant,
    pub rule: ThresholdRule,
    /// Ridge added to a singular class covariance, per class.
    #[serde(default)]
    pub ridge: [Option<f64>; 2],
}

fn quad(x: &[f64], mean: &[f64], inv: &[Vec<f64>]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(mean).map(|(x, m)| x - m).collect();
    inv.iter()
        .zip(&diff)
        .map(|(row, di)| di * row.iter().zip(&diff).map(|(r, dj)| r * dj).sum::<f64>())
        .sum()
}

/// `(x−μ₁)'C₁⁻¹(x−μ₁) − (x−μ₂)'C₂⁻¹(x−μ₂)`.
pub fn mahalanobis_score(
    x: &[f64],
    mean1: &[f64],
    inv_cov1: &[Vec<f64>],
    mean2: &[f64],
    inv_cov2: &[Vec<f64>],
) -> f64 {
    quad(x, mean1, inv_cov1) - quad(x, mean2, inv_cov2)
}

impl DistanceVariant {
    pub fn dim(&self) -> usize {
        match self {
            DistanceVariant::Flat { class1, .. } => class1.dim(),
            DistanceVariant::Mahalanobis { mean1, .. } => mean1.len(),
        }
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(match self {
            DistanceVariant::Flat { class1, class2 } => class1.distance(x)? - class2.distance(x)?,
            DistanceVariant::Mahalanobis {
                mean1,
                inv_cov1,
                mean2,
                inv_cov2,
            } => mahalanobis_score(x, mean1, inv_cov1, mean2, inv_cov2),
        })
    }
}

impl DistanceModel {
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        self.variant.score(x)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let score = self.score(x)?;
        Ok(Prediction {
            label: self.rule.label(score),
            score,
        })
    }
}

/// Fits a two-class distance discriminant and the error-minimizing
/// threshold on its training scores.
pub fn fit_distance(set: &LabeledSet, kind: DistanceKind) -> Result<DistanceModel> {
    set.require_two_classes()?;
    let class = |c: usize| -> Vec<Vec<f64>> { set.class_rows(c).into_iter().cloned().collect() };
    let (c1, c2) = (class(1), class(2));
    let mut ridge = [None, None];
    let variant = match kind {
        DistanceKind::Flat => DistanceVariant::Flat {
            class1: fit_flat(&c1, FLAT_TOL)?,
            class2: fit_flat(&c2, FLAT_TOL)?,
        },
        DistanceKind::Mahalanobis => {
            let mut stats = Vec::with_capacity(2);
            for (i, rows) in [&c1, &c2].into_iter().enumerate() {
                let vecs: Vec<RealVector> = rows.iter().map(|r| RealVector::from_row_slice(r)).collect();
                let (mean, cov) = mean_and_covariance(&vecs)?;
                let (inv, r) = inverse_psd(&cov)?;
                if let Some(r) = r {
                    log::warn!("class {} covariance is singular; ridge {r:e} added", i + 1);
                }
                ridge[i] = r;
                let inv_rows = inv.row_iter().map(|row| row.iter().copied().collect()).collect();
                stats.push((mean.iter().copied().collect::<Vec<f64>>(), inv_rows));
            }
            let (mean2, inv_cov2) = stats.pop().unwrap();
            let (mean1, inv_cov1) = stats.pop().unwrap();
            DistanceVariant::Mahalanobis {
                mean1,
                inv_cov1,
                mean2,
                inv_cov2,
            }
        }
    };
    let scores = set
        .rows()
        .iter()
        .map(|r| variant.score(r))
        .collect::<Result<Vec<f64>>>()?;
    let (rule, _) = choose_threshold(&scores, set.labels())?;
    Ok(DistanceModel {
        variant,
        rule,
        ridge,
    })
}
