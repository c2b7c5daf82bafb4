use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which class lies on the `score ≤ θ` side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Class1Left,
    Class2Left,
}

impl Orientation {
    pub fn left(self) -> usize {
        match self {
            Orientation::Class1Left => 1,
            Orientation::Class2Left => 2,
        }
    }

    pub fn right(self) -> usize {
        3 - self.left()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub theta: f64,
    pub orientation: Orientation,
}

impl ThresholdRule {
    pub fn label(&self, score: f64) -> usize {
        if score <= self.theta {
            self.orientation.left()
        } else {
            self.orientation.right()
        }
    }
}

/// Sorted scores grouped by equal value: (value, count of class 1, count of class 2).
pub(crate) fn grouped(scores: &[f64], labels: &[usize]) -> Vec<(f64, [usize; 2])> {
    let mut pairs: Vec<(f64, usize)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups: Vec<(f64, [usize; 2])> = Vec::new();
    for (s, l) in pairs {
        match groups.last_mut() {
            Some((v, counts)) if *v == s => counts[l - 1] += 1,
            _ => {
                let mut counts = [0; 2];
                counts[l - 1] += 1;
                groups.push((s, counts));
            }
        }
    }
    groups
}

/// Threshold and orientation minimizing the training error of a two-class
/// discriminant.
///
/// Candidates are midpoints between all adjacent distinct score values;
/// both orientations are tried. Ties go to the smaller θ,
/// then to [`Orientation::Class1Left`]. Returns the rule and its training
/// error as a fraction.
pub fn choose_threshold(scores: &[f64], labels: &[usize]) -> Result<(ThresholdRule, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if let Some(&l) = labels.iter().find(|&&l| l != 1 && l != 2) {
        return Err(Error::InvalidArgument(format!("label {l} is not 1 or 2")));
    }
    for c in 1..=2 {
        if !labels.contains(&c) {
            return Err(Error::EmptyClass(c));
        }
    }
    let n = scores.len();
    let groups = grouped(scores, labels);
    let totals = [
        labels.iter().filter(|&&l| l == 1).count(),
        labels.iter().filter(|&&l| l == 2).count(),
    ];
    let mut best: Option<(usize, f64, Orientation)> = None;
    let mut left = [0usize; 2];
    for pair in groups.windows(2) {
        let (v0, c0) = pair[0];
        let v1 = pair[1].0;
        left[0] += c0[0];
        left[1] += c0[1];
        let theta = 0.5 * (v0 + v1);
        // class 1 left: errors are class 2 on the left and class 1 on the right
        let err1 = left[1] + (totals[0] - left[0]);
        let err2 = left[0] + (totals[1] - left[1]);
        for (err, o) in [(err1, Orientation::Class1Left), (err2, Orientation::Class2Left)] {
            if best.is_none_or(|(e, _, _)| err < e) {
                best = Some((err, theta, o));
            }
        }
    }
    let (errors, theta, orientation) = best.unwrap_or_else(|| {
        // no separating candidate: everything on the left, majority class
        let o = if totals[0] >= totals[1] {
            Orientation::Class1Left
        } else {
            Orientation::Class2Left
        };
        let theta = groups.last().map_or(0.0, |g| g.0);
        (totals[0].min(totals[1]), theta, o)
    });
    Ok((ThresholdRule { theta, orientation }, errors as f64 / n as f64))
}
