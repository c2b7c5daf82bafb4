use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizerKind {
    EqualInterval,
    EqualProbability,
    MinError,
}

/// Partition of the discriminant range into labelled intervals.
///
/// `boundaries` are the interior cut points; interval `i` is
/// `(boundaries[i-1], boundaries[i]]`, open-ended at both extremes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub kind: QuantizerKind,
    pub boundaries: Vec<f64>,
    pub labels: Vec<usize>,
    /// Set when all training scores were equal and only one bin exists.
    #[serde(default)]
    pub degenerate: bool,
}

impl Quantizer {
    pub fn intervals(&self) -> usize {
        self.labels.len()
    }

    pub fn interval_of(&self, score: f64) -> usize {
        self.boundaries.partition_point(|&b| b < score)
    }

    pub fn label(&self, score: f64) -> usize {
        self.labels[self.interval_of(score)]
    }

    /// Fraction of training samples in the minority of their interval.
    pub fn error(&self, scores: &[f64], labels: &[usize]) -> f64 {
        let wrong = scores
            .iter()
            .zip(labels)
            .filter(|(s, &l)| self.label(**s) != l)
            .count();
        wrong as f64 / scores.len().max(1) as f64
    }
}

fn majority(counts: &[usize]) -> Option<usize> {
    let max = *counts.iter().max()?;
    (max > 0).then(|| counts.iter().position(|&c| c == max).unwrap() + 1)
}

/// Labels each bin by majority; empty bins copy the nearest labelled bin,
/// preferring the lower one on ties.
fn label_bins(boundaries: &[f64], scores: &[f64], labels: &[usize], classes: usize) -> Vec<usize> {
    let bins = boundaries.len() + 1;
    let mut counts = vec![vec![0usize; classes]; bins];
    for (&s, &l) in scores.iter().zip(labels) {
        counts[boundaries.partition_point(|&b| b < s)][l - 1] += 1;
    }
    let own: Vec<Option<usize>> = counts.iter().map(|c| majority(c)).collect();
    (0..bins)
        .map(|i| {
            own[i].unwrap_or_else(|| {
                (1..bins)
                    .find_map(|d| {
                        let lo = i.checked_sub(d).and_then(|j| own[j]);
                        let hi = own.get(i + d).copied().flatten();
                        lo.or(hi)
                    })
                    .unwrap_or(1)
            })
        })
        .collect()
}

/// Builds an `M`-interval quantizer from training scores.
///
/// * equal interval: `M` equal-width bins over `[min, max]`;
/// * equal probability: bins holding `⌊N/M⌋` or `⌈N/M⌉` sorted scores, cut
///   midway between neighbours (ties in the data can merge bins);
/// * min error: exact dynamic program over at most `M` intervals minimizing
///   the majority-vote training error.
pub fn build_quantizer(
    scores: &[f64],
    labels: &[usize],
    m: usize,
    kind: QuantizerKind,
) -> Result<Quantizer> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("quantizer needs M >= 2, got {m}")));
    }
    if scores.is_empty() {
        return Err(Error::EmptyInput("no scores to quantize"));
    }
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if labels.contains(&0) {
        return Err(Error::InvalidArgument("labels start at 1".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument("non-finite score".into()));
    }
    let classes = *labels.iter().max().unwrap();
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        log::warn!("all training scores equal {lo}; using a single-bin quantizer");
        return Ok(Quantizer {
            kind,
            boundaries: Vec::new(),
            labels: label_bins(&[], scores, labels, classes),
            degenerate: true,
        });
    }
    let boundaries = match kind {
        QuantizerKind::EqualInterval => {
            let width = (hi - lo) / m as f64;
            (1..m).map(|i| lo + i as f64 * width).collect()
        }
        QuantizerKind::EqualProbability => {
            let mut sorted = scores.to_vec();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            let bins = m.min(n);
            let (base, extra) = (n / bins, n % bins);
            let mut cuts: Vec<f64> = Vec::new();
            let mut end = 0;
            for b in 0..bins - 1 {
                end += base + usize::from(b < extra);
                let cut = 0.5 * (sorted[end - 1] + sorted[end]);
                if sorted[end - 1] < sorted[end] && cuts.last().is_none_or(|&c| c < cut) {
                    cuts.push(cut);
                }
            }
            cuts
        }
        QuantizerKind::MinError => return Ok(min_error(scores, labels, m, classes)),
    };
    let labels = label_bins(&boundaries, scores, labels, classes);
    Ok(Quantizer {
        kind,
        boundaries,
        labels,
        degenerate: false,
    })
}

fn min_error(scores: &[f64], labels: &[usize], m: usize, classes: usize) -> Quantizer {
    let mut pairs: Vec<(f64, usize)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut values: Vec<f64> = Vec::new();
    let mut counts: Vec<Vec<u32>> = Vec::new();
    for (s, l) in pairs {
        if values.last() != Some(&s) {
            values.push(s);
            counts.push(vec![0; classes]);
        }
        counts.last_mut().unwrap()[l - 1] += 1;
    }
    let g = values.len();
    let pieces = m.min(g);
    let cost = |j: usize, c: usize| -> u32 { counts[j].iter().sum::<u32>() - counts[j][c] };

    // err[j][p][c]: best error on groups 0..=j using p+1 pieces, last labelled c.
    // from_new[j][p][c]: group j opened a new piece.
    const INF: u32 = u32::MAX / 2;
    let idx = |p: usize, c: usize| p * classes + c;
    let width = pieces * classes;
    let mut err = vec![INF; g * width];
    let mut from_new = vec![false; g * width];
    let mut prev_label = vec![0u16; g * width];
    for c in 0..classes {
        err[idx(0, c)] = cost(0, c);
        from_new[idx(0, c)] = true;
    }
    for j in 1..g {
        let (before, row) = err.split_at_mut(j * width);
        let prev = &before[(j - 1) * width..];
        let row = &mut row[..width];
        for p in 0..pieces {
            // best previous state with p pieces (p-1 index) ending in another label
            for c in 0..classes {
                let stay = prev[idx(p, c)];
                let mut best = stay;
                let mut opened = false;
                let mut plabel = c;
                if p > 0 {
                    for c2 in (0..classes).filter(|&c2| c2 != c) {
                        let v = prev[idx(p - 1, c2)];
                        if v < best {
                            best = v;
                            opened = true;
                            plabel = c2;
                        }
                    }
                }
                if best < INF {
                    row[idx(p, c)] = best + cost(j, c);
                    from_new[j * width + idx(p, c)] = opened;
                    prev_label[j * width + idx(p, c)] = plabel as u16;
                }
            }
        }
    }
    let last = (g - 1) * width;
    let (mut p, mut c) = (0, 0);
    for pp in 0..pieces {
        for cc in 0..classes {
            if err[last + idx(pp, cc)] < err[last + idx(p, c)] {
                p = pp;
                c = cc;
            }
        }
    }
    let mut labels_rev = vec![c + 1];
    let mut cuts_rev = Vec::new();
    for j in (1..g).rev() {
        let k = j * width + idx(p, c);
        if from_new[k] {
            cuts_rev.push(0.5 * (values[j - 1] + values[j]));
            c = prev_label[k] as usize;
            p -= 1;
            labels_rev.push(c + 1);
        }
    }
    cuts_rev.reverse();
    labels_rev.reverse();
    Quantizer {
        kind: QuantizerKind::MinError,
        boundaries: cuts_rev,
        labels: labels_rev,
        degenerate: false,
    }
}
