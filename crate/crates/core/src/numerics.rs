//! Small dense linear algebra for the classifiers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type RealVector = DVector<f64>;
pub type RealMatrix = DMatrix<f64>;

/// Builds an `N × d` matrix from row slices.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<RealMatrix> {
    let Some(first) = rows.first() else {
        return Err(Error::EmptyInput("matrix has no rows"));
    };
    let d = first.len();
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: r.len(),
        });
    }
    Ok(RealMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}

/// Maximum absolute row sum.
pub fn norm_inf(m: &RealMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Sample mean and `1/N`-normalized covariance.
pub fn mean_and_covariance(samples: &[RealVector]) -> Result<(RealVector, RealMatrix)> {
    let Some(first) = samples.first() else {
        return Err(Error::EmptyInput("no samples"));
    };
    let d = first.len();
    if let Some(s) = samples.iter().find(|s| s.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: s.len(),
        });
    }
    let n = samples.len() as f64;
    let mut mean = RealVector::zeros(d);
    for s in samples {
        mean += s;
    }
    mean /= n;
    let mut cov = RealMatrix::zeros(d, d);
    for s in samples {
        let c = s - &mean;
        cov.ger(1.0 / n, &c, &c, 1.0);
    }
    // exact symmetry
    for i in 0..d {
        for j in 0..i {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok((mean, cov))
}

/// Eigenvalues in descending order with matching orthonormal eigenvector
/// columns.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: RealMatrix,
}

impl EigenResult {
    pub fn reconstruct(&self) -> RealMatrix {
        let lambda = RealMatrix::from_diagonal(&RealVector::from_vec(self.values.clone()));
        &self.vectors * lambda * self.vectors.transpose()
    }
}

const MAX_SWEEPS: usize = 100;

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Iterates until the largest off-diagonal entry is below
/// `1e-12 · ‖C‖∞`.
pub fn sym_eigen(c: &RealMatrix) -> Result<EigenResult> {
    let n = c.nrows();
    if n != c.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: c.ncols(),
        });
    }
    let scale = norm_inf(c);
    let asym = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (c[(i, j)] - c[(j, i)]).abs())
        .fold(0.0, f64::max);
    if asym > 1e-10 * scale.max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let mut a = c.clone();
    let mut v = RealMatrix::identity(n, n);
    let tol = 1e-12 * scale;
    for _ in 0..MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].abs())
            .fold(0.0, f64::max);
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(p, p)] - a[(q, q)]) / (2.0 * apq);
                let t = -theta.signum() / (theta.abs() + theta.hypot(1.0));
                let cos = 1.0 / t.hypot(1.0);
                let sin = t * cos;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = cos * akp - sin * akq;
                    a[(k, q)] = sin * akp + cos * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = cos * apk - sin * aqk;
                    a[(q, k)] = sin * apk + cos * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = cos * vkp - sin * vkq;
                    v[(k, q)] = sin * vkp + cos * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = RealMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok(EigenResult { values, vectors })
}

/// Solves `M x = rhs` for symmetric positive semidefinite `M`.
///
/// When the smallest eigenvalue is below `1e-12 · λ_max`, the system is
/// regularized to `(M + λI) x = rhs` with `λ = 1e-8 · trace(M) / dim`; the
/// ridge used is returned alongside the solution.
pub fn solve_psd(m: &RealMatrix, rhs: &RealVector) -> Result<(RealVector, Option<f64>)> {
    let d = m.nrows();
    if d == 0 {
        return Err(Error::EmptyInput("zero-dimensional system"));
    }
    if rhs.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: rhs.len(),
        });
    }
    let eig = sym_eigen(m)?;
    let lmax = eig.values[0];
    let lmin = eig.values[d - 1];
    let trace = m.trace();
    if trace <= 0.0 || lmax <= 0.0 {
        return Ok((RealVector::zeros(d), Some(0.0)));
    }
    let ridge = (lmin < 1e-12 * lmax).then(|| 1e-8 * trace / d as f64);
    let shift = ridge.unwrap_or(0.0);
    let proj = eig.vectors.transpose() * rhs;
    let scaled = RealVector::from_fn(d, |i, _| proj[i] / (eig.values[i] + shift));
    Ok((&eig.vectors * scaled, ridge))
}

/// Inverse of a symmetric positive semidefinite matrix, with the same ridge
/// repair as [`solve_psd`]. A zero matrix is inverted as `(0 + 1e-8·I)`.
pub fn inverse_psd(m: &RealMatrix) -> Result<(RealMatrix, Option<f64>)> {
    let d = m.nrows();
    if d == 0 {
        return Err(Error::EmptyInput("zero-dimensional matrix"));
    }
    let eig = sym_eigen(m)?;
    let lmax = eig.values[0];
    let lmin = eig.values[d - 1];
    let trace = m.trace();
    let ridge = if trace <= 0.0 || lmax <= 0.0 {
        Some(1e-8)
    } else {
        (lmin < 1e-12 * lmax).then(|| 1e-8 * trace / d as f64)
    };
    let shift = ridge.unwrap_or(0.0);
    let inv_diag = RealVector::from_fn(d, |i, _| 1.0 / (eig.values[i].max(0.0) + shift));
    let inv = &eig.vectors * RealMatrix::from_diagonal(&inv_diag) * eig.vectors.transpose();
    // symmetrize away rounding
    let inv = 0.5 * (&inv + inv.transpose());
    Ok((inv, ridge))
}

/// `argmin ‖Av − b‖` via the normal equation `A'A v = A'b`, with the ridge
/// fallback of [`solve_psd`] for singular `A'A`.
pub fn least_squares(a: &RealMatrix, b: &RealVector) -> Result<RealVector> {
    Ok(least_squares_with_ridge(a, b)?.0)
}

pub fn least_squares_with_ridge(a: &RealMatrix, b: &RealVector) -> Result<(RealVector, Option<f64>)> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::EmptyInput("zero-dimensional least squares"));
    }
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            actual: b.len(),
        });
    }
    let ata = a.tr_mul(a);
    let atb = a.tr_mul(b);
    solve_psd(&ata, &atb)
}

const QP_MAX_SWEEPS: usize = 20_000;
const QP_TOL: f64 = 1e-10;

/// Minimizes `w'w` subject to `A w ≥ 1` (rows of `A` are `y_k z_k'`).
///
/// Coordinate ascent on the nonnegative dual `max Σα − ½‖A'α‖²`; stops once
/// the primal is feasible to `1e-10` and the duality gap `‖w‖² − Σα` is below
/// `1e-10 · max(1, ‖w‖²)`.
pub fn qp_hard_margin(a: &RealMatrix) -> Result<RealVector> {
    let (k, d) = a.shape();
    if k == 0 || d == 0 {
        return Err(Error::EmptyInput("empty constraint matrix"));
    }
    let rows: Vec<RealVector> = (0..k).map(|i| a.row(i).transpose()).collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.norm_squared()).collect();
    if norms.contains(&0.0) {
        return Err(Error::NonSeparable);
    }
    let mut alpha = vec![0.0; k];
    let mut w = RealVector::zeros(d);
    for _ in 0..QP_MAX_SWEEPS {
        for i in 0..k {
            let g = 1.0 - rows[i].dot(&w);
            let step = (g / norms[i]).max(-alpha[i]);
            if step != 0.0 {
                alpha[i] += step;
                w.axpy(step, &rows[i], 1.0);
            }
        }
        let violation = rows
            .iter()
            .map(|r| 1.0 - r.dot(&w))
            .fold(f64::NEG_INFINITY, f64::max);
        let ww = w.norm_squared();
        let sum: f64 = alpha.iter().sum();
        if violation <= QP_TOL && (ww - sum).abs() <= QP_TOL * ww.max(1.0) {
            return Ok(w);
        }
        // dual value bounds ½‖w*‖²; beyond this the ribbon is numerically empty
        if sum - 0.5 * ww > 1e12 {
            return Err(Error::NonSeparable);
        }
    }
    Err(Error::NonSeparable)
}
