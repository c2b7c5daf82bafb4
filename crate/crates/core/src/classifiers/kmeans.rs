use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::check_dim;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum KMeansInit {
    /// Explicit starting centers.
    Centers(Vec<Vec<f64>>),
    /// `K` distinct points drawn with this seed.
    Sample(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centers: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub iterations: usize,
    /// `Σ ‖x − μ‖²` after each assignment step.
    pub objective_history: Vec<f64>,
    /// Final `Σ ‖x − μ‖²`.
    pub objective: f64,
    /// Final `Σ ‖x − μ‖` with unsquared norms.
    pub literal_objective: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest center, ties to the lower index.
pub(crate) fn nearest(centers: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, c) in centers.iter().enumerate() {
        let d = sq_dist(c, x);
        if d < best_d {
            best = k;
            best_d = d;
        }
    }
    best
}

impl KMeansModel {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        check_dim(self.centers[0].len(), x)?;
        Ok(nearest(&self.centers, x))
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Lloyd iterations from the given start until the assignment is stable or
/// `max_iter` assignment steps have run.
///
/// An empty cluster is reseeded with the point farthest from its current
/// center, taken from a cluster that keeps at least one member.
pub fn kmeans(points: &[Vec<f64>], k: usize, init: KMeansInit, max_iter: usize) -> Result<KMeansModel> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    if points.len() < k {
        return Err(Error::TooFewPoints {
            needed: k,
            got: points.len(),
        });
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let d = points[0].len();
    for p in points {
        check_dim(d, p)?;
    }
    let mut centers = match init {
        KMeansInit::Centers(c) => {
            if c.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    actual: c.len(),
                });
            }
            for center in &c {
                check_dim(d, center)?;
            }
            c
        }
        KMeansInit::Sample(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = sample(&mut rng, points.len(), k).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| points[i].clone()).collect()
        }
    };
    let mut assignments: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut next: Vec<usize> = points.iter().map(|p| nearest(&centers, p)).collect();
        reseed_empty(points, &mut centers, &mut next, k);
        history.push(
            points
                .iter()
                .zip(&next)
                .map(|(p, &a)| sq_dist(p, &centers[a]))
                .sum(),
        );
        let stable = next == assignments;
        assignments = next;
        if stable {
            break;
        }
        centers = means(points, &assignments, &centers);
        if iterations >= max_iter {
            break;
        }
    }
    let objective = points
        .iter()
        .zip(&assignments)
        .map(|(p, &a)| sq_dist(p, &centers[a]))
        .sum();
    let literal_objective = points
        .iter()
        .zip(&assignments)
        .map(|(p, &a)| sq_dist(p, &centers[a]).sqrt())
        .sum();
    Ok(KMeansModel {
        centers,
        assignments,
        iterations,
        objective_history: history,
        objective,
        literal_objective,
    })
}

fn reseed_empty(points: &[Vec<f64>], centers: &mut [Vec<f64>], assign: &mut [usize], k: usize) {
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assign.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut far: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if sizes[assign[i]] < 2 {
                continue;
            }
            let dist = sq_dist(p, &centers[assign[i]]);
            if far.is_none_or(|(_, fd)| dist > fd) {
                far = Some((i, dist));
            }
        }
        let (i, _) = far.expect("K ≤ N leaves a cluster with two members");
        log::debug!("k-means: cluster {empty} empty, reseeded with point {i}");
        centers[empty] = points[i].clone();
        assign[i] = empty;
    }
}

fn means(points: &[Vec<f64>], assign: &[usize], old: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = points[0].len();
    let mut sums = vec![vec![0.0; d]; old.len()];
    let mut counts = vec![0usize; old.len()];
    for (p, &a) in points.iter().zip(assign) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    sums.into_iter()
        .zip(counts)
        .zip(old)
        .map(|((s, n), o)| {
            if n == 0 {
                o.clone()
            } else {
                s.into_iter().map(|v| v / n as f64).collect()
            }
        })
        .collect()
}
