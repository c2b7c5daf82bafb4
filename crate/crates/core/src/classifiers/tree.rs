use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{check_dim, LabeledSet, Prediction};
use crate::error::{Error, Result};

/// Purity `PR = Σ_c (n_Lc ln p_Lc + n_Rc ln p_Rc)` and
/// `χ² = PR − Σ_c N_c ln(N_c/N)` of a split, with `0 · ln 0 = 0`.
pub fn node_stats(left: &[usize], right: &[usize]) -> Result<(f64, f64)> {
    if left.len() != right.len() {
        return Err(Error::DimensionMismatch {
            expected: left.len(),
            actual: right.len(),
        });
    }
    let (nl, nr): (usize, usize) = (left.iter().sum(), right.iter().sum());
    let n = nl + nr;
    if n == 0 {
        return Err(Error::EmptyInput("split has no samples"));
    }
    let xlogp = |k: usize, total: usize| {
        if k == 0 {
            0.0
        } else {
            k as f64 * (k as f64 / total as f64).ln()
        }
    };
    let pr: f64 = left
        .iter()
        .zip(right)
        .map(|(&l, &r)| xlogp(l, nl) + xlogp(r, nr))
        .sum();
    let base: f64 = left.iter().zip(right).map(|(&l, &r)| xlogp(l + r, n)).sum();
    Ok((pr, pr - base))
}

/// 95% quantile of the χ² distribution with `classes − 1` degrees of freedom.
pub fn chi_square_cutoff(classes: usize) -> f64 {
    match ChiSquared::new(classes.saturating_sub(1).max(1) as f64) {
        Ok(d) => d.inverse_cdf(0.95),
        Err(_) => 0.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Deepest split level; the root is level 0. Defaults to `⌊log₂ N⌋ − 1`.
    pub max_depth: Option<usize>,
    pub min_node: usize,
    /// Splits with χ² below this stop expansion. Defaults to
    /// [`chi_square_cutoff`].
    pub chi2_cutoff: Option<f64>,
    /// `(ε_I, ε_II)`: switch to the misclassification criterion, admitting
    /// only thresholds whose type I and type II errors are below these.
    pub epsilon: Option<(f64, f64)>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_node: 10,
            chi2_cutoff: None,
            epsilon: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        label: usize,
    },
    Split {
        feature: usize,
        theta: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: TreeNode,
    pub dim: usize,
    pub classes: usize,
    pub max_depth: usize,
    pub min_node: usize,
    pub chi2_cutoff: f64,
    #[serde(default)]
    pub epsilon: Option<(f64, f64)>,
}

impl TreeModel {
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        check_dim(self.dim, x)?;
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label } => {
                    return Ok(Prediction {
                        label: *label,
                        score: *label as f64,
                    })
                }
                TreeNode::Split {
                    feature,
                    theta,
                    left,
                    right,
                } => node = if x[*feature] <= *theta { left } else { right },
            }
        }
    }
}

/// A candidate split found at one node.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Candidate {
    pub feature: usize,
    pub theta: f64,
    pub purity: f64,
    pub chi2: f64,
    /// Misclassification count under the left/right class grouping.
    pub errors: usize,
    pub admissible: bool,
}

fn counts_of(idx: &[usize], labels: &[usize], classes: usize) -> Vec<usize> {
    let mut c = vec![0; classes];
    for &i in idx {
        c[labels[i] - 1] += 1;
    }
    c
}

fn majority(counts: &[usize]) -> usize {
    let max = counts.iter().max().copied().unwrap_or(0);
    counts.iter().position(|&c| c == max).unwrap_or(0) + 1
}

/// Type I / type II errors and misclassifications when each class is
/// grouped on the side holding most of its samples (ties go left). `None`
/// when every class lands in the same group.
fn grouped_errors(left: &[usize], right: &[usize]) -> Option<(f64, f64, usize)> {
    let (mut out_l, mut tot_l, mut out_r, mut tot_r) = (0, 0, 0, 0);
    for (&l, &r) in left.iter().zip(right) {
        if l >= r {
            out_l += r;
            tot_l += l + r;
        } else {
            out_r += l;
            tot_r += l + r;
        }
    }
    if tot_l == 0 || tot_r == 0 {
        return None;
    }
    Some((
        out_l as f64 / tot_l as f64,
        out_r as f64 / tot_r as f64,
        out_l + out_r,
    ))
}

/// All candidate thresholds of every component at a node: midpoints
/// between adjacent distinct values whose classes differ.
pub(crate) fn candidates(
    rows: &[Vec<f64>],
    labels: &[usize],
    idx: &[usize],
    classes: usize,
    epsilon: Option<(f64, f64)>,
) -> Vec<Candidate> {
    let total = counts_of(idx, labels, classes);
    let dim = rows[idx[0]].len();
    let mut out = Vec::new();
    let mut order = idx.to_vec();
    for feature in 0..dim {
        order.sort_by(|&a, &b| rows[a][feature].total_cmp(&rows[b][feature]));
        // groups of equal values with their class counts
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for &i in &order {
            let v = rows[i][feature];
            match groups.last_mut() {
                Some((g, c)) if *g == v => c[labels[i] - 1] += 1,
                _ => {
                    let mut c = vec![0; classes];
                    c[labels[i] - 1] += 1;
                    groups.push((v, c));
                }
            }
        }
        let pure = |c: &[usize]| {
            let nz: Vec<usize> = (0..classes).filter(|&k| c[k] > 0).collect();
            (nz.len() == 1).then(|| nz[0])
        };
        let mut left = vec![0usize; classes];
        for w in groups.windows(2) {
            for (l, c) in left.iter_mut().zip(&w[0].1) {
                *l += c;
            }
            if let (Some(a), Some(b)) = (pure(&w[0].1), pure(&w[1].1)) {
                if a == b {
                    continue;
                }
            }
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let (purity, chi2) = node_stats(&left, &right).expect("node is nonempty");
            let grouped = grouped_errors(&left, &right);
            let errors = grouped.map_or(usize::MAX, |g| g.2);
            let admissible = match (epsilon, grouped) {
                (None, _) => true,
                (Some((ei, eii)), Some((e1, e2, _))) => e1 < ei && e2 < eii,
                (Some(_), None) => false,
            };
            out.push(Candidate {
                feature,
                theta: 0.5 * (w[0].0 + w[1].0),
                purity,
                chi2,
                errors,
                admissible,
            });
        }
    }
    out
}

/// Best candidate: maximal purity (or minimal misclassification in the
/// ε variant among admissible thresholds); ties keep the first in
/// (component, θ) order.
pub(crate) fn best_candidate(cands: &[Candidate], epsilon: bool) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for c in cands.iter().filter(|c| c.admissible) {
        let better = match best {
            None => true,
            Some(b) if epsilon => c.errors < b.errors,
            Some(b) => c.purity > b.purity,
        };
        if better {
            best = Some(*c);
        }
    }
    best
}

/// Grows a binary threshold tree on `set`.
///
/// A node becomes a leaf labelled by its majority class (ties to the lower
/// label) when it is at the depth limit, holds fewer than `min_node`
/// samples, has no candidate threshold, or its best split has χ² below the
/// cutoff. In the ε variant a node with no admissible threshold is a leaf.
pub fn fit_tree(set: &LabeledSet, params: &TreeParams) -> Result<TreeModel> {
    if set.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: set.len(),
        });
    }
    let n = set.len();
    let max_depth = params
        .max_depth
        .unwrap_or_else(|| (n.ilog2() as usize).saturating_sub(1));
    let chi2_cutoff = params
        .chi2_cutoff
        .unwrap_or_else(|| chi_square_cutoff(set.classes()));
    let idx: Vec<usize> = (0..n).collect();
    let root = grow(set, params, max_depth, chi2_cutoff, &idx, 0);
    Ok(TreeModel {
        root,
        dim: set.dim(),
        classes: set.classes(),
        max_depth,
        min_node: params.min_node,
        chi2_cutoff,
        epsilon: params.epsilon,
    })
}

fn grow(
    set: &LabeledSet,
    params: &TreeParams,
    max_depth: usize,
    chi2_cutoff: f64,
    idx: &[usize],
    depth: usize,
) -> TreeNode {
    let counts = counts_of(idx, set.labels(), set.classes());
    let leaf = TreeNode::Leaf {
        label: majority(&counts),
    };
    if depth >= max_depth || idx.len() < params.min_node.max(2) {
        return leaf;
    }
    let cands = candidates(set.rows(), set.labels(), idx, set.classes(), params.epsilon);
    let Some(best) = best_candidate(&cands, params.epsilon.is_some()) else {
        return leaf;
    };
    if best.chi2 < chi2_cutoff {
        return leaf;
    }
    let (l, r): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| set.rows()[i][best.feature] <= best.theta);
    TreeNode::Split {
        feature: best.feature,
        theta: best.theta,
        left: Box::new(grow(set, params, max_depth, chi2_cutoff, &l, depth + 1)),
        right: Box::new(grow(set, params, max_depth, chi2_cutoff, &r, depth + 1)),
    }
}
