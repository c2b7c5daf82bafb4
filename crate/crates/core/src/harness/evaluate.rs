use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledWordSet;
use super::pipeline::WordClassifier;
use crate::error::{Error, Result};

/// Length thresholds of the reported strata `|w| > t`.
pub const DEFAULT_STRATA: [usize; 3] = [0, 4, 100];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumAccuracy {
    /// The stratum holds words with `|w| > min_length`.
    pub min_length: usize,
    pub n: usize,
    pub correct: usize,
    /// `None` for an empty stratum.
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub center: f64,
    pub class1: usize,
    pub class2: usize,
}

/// Class-conditional counts of discriminant values over equal-width bins
/// spanning the observed range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bins: Vec<HistogramBin>,
}

impl Histogram {
    pub fn build(scores: &[(f64, usize)], bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidArgument(format!("histogram needs at least 2 bins, got {bins}")));
        }
        let (mut lo, mut hi) = scores
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(s, _)| (lo.min(s), hi.max(s)));
        if scores.is_empty() {
            (lo, hi) = (0.0, 1.0);
        } else if lo == hi {
            (lo, hi) = (lo - 0.5, hi + 0.5);
        }
        let width = (hi - lo) / bins as f64;
        let mut out: Vec<HistogramBin> = (0..bins)
            .map(|i| HistogramBin {
                center: lo + (i as f64 + 0.5) * width,
                class1: 0,
                class2: 0,
            })
            .collect();
        for &(s, class) in scores {
            let i = (((s - lo) / width) as usize).min(bins - 1);
            match class {
                1 => out[i].class1 += 1,
                _ => out[i].class2 += 1,
            }
        }
        Ok(Histogram { lo, hi, bins: out })
    }

    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.class1 + b.class2).sum()
    }

    /// `Σ_bins min(class1, class2)` as a fraction of all counts.
    pub fn overlap_mass(&self) -> f64 {
        let shared: usize = self.bins.iter().map(|b| b.class1.min(b.class2)).sum();
        shared as f64 / self.total().max(1) as f64
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "bin_center,count_class1,count_class2")?;
        for b in &self.bins {
            writeln!(out, "{},{},{}", b.center, b.class1, b.class2)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub strata: Vec<StratumAccuracy>,
    /// `confusion[true − 1][predicted − 1]`.
    pub confusion: [[usize; 2]; 2],
    pub histogram: Histogram,
    /// `(score, true class)` per test word, in input order.
    pub scores: Vec<(f64, usize)>,
}

impl EvaluationReport {
    pub fn accuracy(&self, min_length: usize) -> Option<f64> {
        self.strata
            .iter()
            .find(|s| s.min_length == min_length)
            .and_then(|s| s.accuracy)
    }

    /// Fraction of words whose score falls on the wrong side of `theta`:
    /// class 1 above it or class 2 at or below it.
    pub fn mass_beyond(&self, theta: f64) -> f64 {
        let wrong = self
            .scores
            .iter()
            .filter(|&&(s, c)| (c == 1) == (s > theta))
            .count();
        wrong as f64 / self.scores.len().max(1) as f64
    }

    pub fn write_accuracy_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "stratum,n,accuracy")?;
        for s in &self.strata {
            let acc = s.accuracy.map(|a| a.to_string()).unwrap_or_default();
            writeln!(out, ">{},{},{}", s.min_length, s.n, acc)?;
        }
        Ok(())
    }
}

/// Classifies every test word and tallies accuracy per length stratum, the
/// confusion matrix and a `bins`-bin score histogram.
pub fn evaluate(
    classifier: &dyn WordClassifier,
    test: &LabeledWordSet,
    strata: &[usize],
    bins: usize,
) -> Result<EvaluationReport> {
    let predictions = test
        .records
        .par_iter()
        .map(|r| classifier.classify(&r.word))
        .collect::<Result<Vec<_>>>()?;
    let mut confusion = [[0usize; 2]; 2];
    let mut scores = Vec::with_capacity(test.len());
    let mut stats: Vec<StratumAccuracy> = strata
        .iter()
        .map(|&t| StratumAccuracy {
            min_length: t,
            n: 0,
            correct: 0,
            accuracy: None,
        })
        .collect();
    for (r, p) in test.records.iter().zip(&predictions) {
        let truth = r.label.class();
        confusion[truth - 1][p.label.clamp(1, 2) - 1] += 1;
        scores.push((p.score, truth));
        for s in stats.iter_mut().filter(|s| r.length() > s.min_length) {
            s.n += 1;
            s.correct += usize::from(p.label == truth);
        }
    }
    for s in &mut stats {
        s.accuracy = (s.n > 0).then(|| s.correct as f64 / s.n as f64);
    }
    let histogram = Histogram::build(&scores, bins)?;
    Ok(EvaluationReport {
        strata: stats,
        confusion,
        histogram,
        scores,
    })
}

/// Class-conditional score histogram of a classifier on a word set.
pub fn score_histogram(classifier: &dyn WordClassifier, set: &LabeledWordSet, bins: usize) -> Result<Histogram> {
    let scores = set
        .records
        .par_iter()
        .map(|r| Ok((classifier.classify(&r.word)?.score, r.label.class())))
        .collect::<Result<Vec<_>>>()?;
    Histogram::build(&scores, bins)
}
