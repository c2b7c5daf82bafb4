use serde::{Deserialize, Serialize};

use super::check_dim;
use crate::error::{Error, Result};
use crate::numerics::{mean_and_covariance, sym_eigen, RealVector};

/// The affine flat through the class mean spanned by the principal
/// directions; `normals` are the near-zero-variance eigenvectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatModel {
    pub mean: Vec<f64>,
    pub normals: Vec<Vec<f64>>,
    pub tol: f64,
}

impl FlatModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Number of principal directions `K`.
    pub fn flat_dim(&self) -> usize {
        self.dim() - self.normals.len()
    }

    /// `‖T'(x − μ)‖`.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        let sq: f64 = self
            .normals
            .iter()
            .map(|t| {
                let p: f64 = t.iter().zip(x).zip(&self.mean).map(|((t, x), m)| t * (x - m)).sum();
                p * p
            })
            .sum();
        Ok(sq.sqrt())
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.distance(x)? < self.tol)
    }
}

/// Fits the flat of a sample cloud. Eigendirections with eigenvalue below
/// `tol · λ_max` become normals; `tol` is also the zero test for
/// [`FlatModel::contains`].
pub fn fit_flat(samples: &[Vec<f64>], tol: f64) -> Result<FlatModel> {
    if samples.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: samples.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("flat tolerance must be positive, got {tol}")));
    }
    let vecs: Vec<RealVector> = samples.iter().map(|s| RealVector::from_row_slice(s)).collect();
    let (mean, cov) = mean_and_covariance(&vecs)?;
    let eig = sym_eigen(&cov)?;
    let lmax = eig.values[0];
    let normals = (0..eig.values.len())
        .filter(|&i| lmax <= 0.0 || eig.values[i] < tol * lmax)
        .map(|i| eig.vectors.column(i).iter().copied().collect())
        .collect();
    Ok(FlatModel {
        mean: mean.iter().copied().collect(),
        normals,
        tol,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatOutcome {
    Class1,
    Class2,
    Both,
    Neither,
}

pub fn classify_by_flats(x: &[f64], f1: &FlatModel, f2: &FlatModel) -> Result<FlatOutcome> {
    check_dim(f1.dim(), x)?;
    check_dim(f2.dim(), x)?;
    Ok(match (f1.contains(x)?, f2.contains(x)?) {
        (true, false) => FlatOutcome::Class1,
        (false, true) => FlatOutcome::Class2,
        (true, true) => FlatOutcome::Both,
        (false, false) => FlatOutcome::Neither,
    })
}
