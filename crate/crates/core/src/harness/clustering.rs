use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledWordSet;
use crate::classifiers::{kmeans, KMeansInit, KMeansModel};
use crate::error::{Error, Result};
use crate::features::{builtin_map, FeatureMap};
use crate::freegroup::{reducer_mask, CyclicWord, NielsenMove};

pub const CENTERS_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterInit {
    /// `K` distinct points of the clustered set.
    Random,
    /// Means of the words reduced by exactly one Nielsen move.
    Estimated,
}

impl FromStr for ClusterInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(ClusterInit::Random),
            "estimated" => Ok(ClusterInit::Estimated),
            _ => Err(Error::InvalidArgument(format!("unknown initialization {s:?}"))),
        }
    }
}

impl fmt::Display for ClusterInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClusterInit::Random => "random",
            ClusterInit::Estimated => "estimated",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub k: usize,
    pub init: ClusterInit,
    pub seed: u64,
    /// Share of the shuffled set reserved for center estimation.
    pub sample_fraction: f64,
    pub max_iter: usize,
}

impl ClusterConfig {
    pub fn new(init: ClusterInit, seed: u64) -> Self {
        ClusterConfig {
            k: 4,
            init,
            seed,
            sample_fraction: 0.1,
            max_iter: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub size: usize,
    /// `R(t, C)` for each move of [`NielsenMove::ALL`].
    pub reduced_by: [f64; 4],
    pub r_max: f64,
    pub best_move: NielsenMove,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub init: ClusterInit,
    pub clusters: Vec<ClusterStats>,
    pub avg_r_max: f64,
    pub max_r_max: f64,
    pub min_r_max: f64,
    pub iterations: usize,
}

impl ClusterReport {
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> Result<()> {
        let moves: Vec<String> = NielsenMove::ALL.iter().map(|m| format!("R({m})")).collect();
        writeln!(out, "cluster,size,{},r_max,best_move", moves.join(","))?;
        for (i, c) in self.clusters.iter().enumerate() {
            let r: Vec<String> = c.reduced_by.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{i},{},{},{},{}", c.size, r.join(","), c.r_max, c.best_move)?;
        }
        Ok(())
    }
}

/// Cluster centers tagged with the move predicted for their members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducerCenters {
    pub schema_version: u32,
    pub feature_map: String,
    pub centers: Vec<Vec<f64>>,
    pub moves: Vec<NielsenMove>,
}

impl ReducerCenters {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ReducerCenters = serde_json::from_str(text)?;
        if c.schema_version != CENTERS_SCHEMA_VERSION {
            return Err(Error::SchemaVersion(c.schema_version));
        }
        if c.centers.is_empty() || c.centers.len() != c.moves.len() {
            return Err(Error::Data("centers and moves must be nonempty and of equal length".into()));
        }
        Ok(c)
    }
}

#[derive(Clone, Debug)]
pub struct ClusterOutcome {
    pub report: ClusterReport,
    pub centers: ReducerCenters,
    pub model: KMeansModel,
}

/// Reducer bitmasks of rank-2 words, each required to be nonzero.
fn masks(words: &[CyclicWord]) -> Result<Vec<u8>> {
    let masks = words
        .par_iter()
        .map(reducer_mask)
        .collect::<Result<Vec<u8>>>()?;
    if let Some(i) = masks.iter().position(|&m| m == 0) {
        return Err(Error::InvalidArgument(format!(
            "word {} is minimal; clustering needs nonminimal words",
            words[i]
        )));
    }
    Ok(masks)
}

/// Mean feature vector of `C_t`, the sample words shortened by `t` and by
/// no other Nielsen move, for each `t` in [`NielsenMove::ALL`] order.
pub fn estimate_initial_centers(sample: &[CyclicWord], map: &FeatureMap) -> Result<Vec<Vec<f64>>> {
    let masks = masks(sample)?;
    let rows = map.feature_matrix(sample)?;
    NielsenMove::ALL
        .iter()
        .map(|&t| {
            let bit = 1u8 << t.index();
            let members: Vec<&Vec<f64>> = rows
                .iter()
                .zip(&masks)
                .filter(|(_, &m)| m == bit)
                .map(|(r, _)| r)
                .collect();
            if members.is_empty() {
                return Err(Error::EmptyPureSet(t));
            }
            let mut mean = vec![0.0; map.dim()];
            for r in &members {
                for (m, v) in mean.iter_mut().zip(r.iter()) {
                    *m += v;
                }
            }
            Ok(mean.into_iter().map(|m| m / members.len() as f64).collect())
        })
        .collect()
}

/// Per-cluster reduction rates of a clustering.
pub fn cluster_report(init: ClusterInit, model: &KMeansModel, masks: &[u8]) -> ClusterReport {
    let mut counts = vec![[0usize; 4]; model.k()];
    let mut sizes = vec![0usize; model.k()];
    for (&a, &m) in model.assignments.iter().zip(masks) {
        sizes[a] += 1;
        for t in 0..4 {
            counts[a][t] += usize::from(m >> t & 1 == 1);
        }
    }
    let clusters: Vec<ClusterStats> = counts
        .iter()
        .zip(&sizes)
        .map(|(c, &n)| {
            let reduced_by = c.map(|v| v as f64 / n.max(1) as f64);
            let mut best = 0;
            for t in 1..4 {
                if reduced_by[t] > reduced_by[best] {
                    best = t;
                }
            }
            ClusterStats {
                size: n,
                reduced_by,
                r_max: reduced_by[best],
                best_move: NielsenMove::ALL[best],
            }
        })
        .collect();
    let r: Vec<f64> = clusters.iter().map(|c| c.r_max).collect();
    ClusterReport {
        init,
        avg_r_max: r.iter().sum::<f64>() / r.len() as f64,
        max_r_max: r.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_r_max: r.iter().copied().fold(f64::INFINITY, f64::min),
        clusters,
        iterations: model.iterations,
    }
}

/// K-means on the feature vectors of nonminimal rank-2 words.
///
/// The set is shuffled with the seed; the first `sample_fraction` of it
/// estimates initial centers (used only by [`ClusterInit::Estimated`]) and
/// the remainder is clustered, so both initializations see the same points.
pub fn clustering_experiment(set: &LabeledWordSet, map: &FeatureMap, cfg: &ClusterConfig) -> Result<ClusterOutcome> {
    if set.rank != 2 || map.rank() != 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            actual: if set.rank != 2 { set.rank } else { map.rank() },
        });
    }
    if cfg.init == ClusterInit::Estimated && cfg.k != 4 {
        return Err(Error::InvalidArgument("estimated centers need K = 4".into()));
    }
    if !(0.0..1.0).contains(&cfg.sample_fraction) {
        return Err(Error::InvalidArgument(format!(
            "sample fraction {} outside [0, 1)",
            cfg.sample_fraction
        )));
    }
    let mut words = set.words();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    words.shuffle(&mut rng);
    let n_sample = (cfg.sample_fraction * words.len() as f64).ceil() as usize;
    let (sample, rest) = words.split_at(n_sample.min(words.len()));
    if rest.len() < cfg.k {
        return Err(Error::TooFewPoints {
            needed: cfg.k,
            got: rest.len(),
        });
    }
    let rest_masks = masks(rest)?;
    let rows = map.feature_matrix(rest)?;
    let init = match cfg.init {
        ClusterInit::Estimated => KMeansInit::Centers(estimate_initial_centers(sample, map)?),
        ClusterInit::Random => KMeansInit::Sample(cfg.seed),
    };
    let model = kmeans(&rows, cfg.k, init, cfg.max_iter)?;
    let report = cluster_report(cfg.init, &model, &rest_masks);
    let centers = ReducerCenters {
        schema_version: CENTERS_SCHEMA_VERSION,
        feature_map: map.name().to_string(),
        centers: model.centers.clone(),
        moves: report.clusters.iter().map(|c| c.best_move).collect(),
    };
    Ok(ClusterOutcome {
        report,
        centers,
        model,
    })
}

/// Move of the center nearest to the word's feature vector, ties to the
/// earlier center.
pub fn predict_reducer(w: &CyclicWord, centers: &ReducerCenters) -> Result<NielsenMove> {
    let map = builtin_map(&centers.feature_map, 2)?;
    predict_reducer_with(w, centers, &map)
}

pub fn predict_reducer_with(w: &CyclicWord, centers: &ReducerCenters, map: &FeatureMap) -> Result<NielsenMove> {
    let x = map.feature_vector(w)?;
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.centers.iter().enumerate() {
        if c.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: c.len(),
            });
        }
        let d: f64 = c.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    Ok(centers.moves[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::dataset::{generate_dataset, DatasetKind, DatasetSpec, Label};

    fn c(s: &str) -> CyclicWord {
        CyclicWord::parse(s, 2).unwrap()
    }

    fn nonminimal(seed: u64, max_len: usize) -> LabeledWordSet {
        generate_dataset(&DatasetSpec {
            per_length: 10,
            ..DatasetSpec::new(DatasetKind::D, 2, max_len, seed)
        })
        .unwrap()
        .filter(Label::Nonminimal)
    }

    /// One word per move, each shortened by that move alone.
    fn singletons() -> Vec<CyclicWord> {
        let mut out = vec![None; 4];
        let set = nonminimal(1, 30);
        for r in &set.records {
            let m = reducer_mask(&r.word).unwrap();
            if m.count_ones() == 1 {
                out[m.trailing_zeros() as usize].get_or_insert(r.word.clone());
            }
        }
        out.into_iter().map(Option::unwrap).collect()
    }

    #[test]
    fn singleton_pure_sets() {
        let map = builtin_map("f2", 2).unwrap();
        let words = singletons();
        let centers = estimate_initial_centers(&words, &map).unwrap();
        for (w, center) in words.iter().zip(&centers) {
            assert_eq!(&map.feature_vector(w).unwrap().0, center);
        }
    }

    #[test]
    fn multiply_reduced_words_join_no_pure_set() {
        let map = builtin_map("f2", 2).unwrap();
        // "ab" is shortened by several Nielsen moves
        assert!(reducer_mask(&c("ab")).unwrap().count_ones() > 1);
        let mut words = singletons();
        words[0] = c("ab");
        assert!(matches!(
            estimate_initial_centers(&words, &map),
            Err(Error::EmptyPureSet(NielsenMove::AtoAB))
        ));
    }

    #[test]
    fn minimal_words_are_rejected() {
        let map = builtin_map("f2", 2).unwrap();
        let set = LabeledWordSet::new(2, vec![]).unwrap();
        assert!(clustering_experiment(&set, &map, &ClusterConfig::new(ClusterInit::Random, 0)).is_err());
        assert!(estimate_initial_centers(&[c("abAB")], &map).is_err());
    }

    #[test]
    fn report_invariants() {
        let set = nonminimal(2, 120);
        let map = builtin_map("f2", 2).unwrap();
        for init in [ClusterInit::Random, ClusterInit::Estimated] {
            let out = clustering_experiment(&set, &map, &ClusterConfig::new(init, 3)).unwrap();
            let r = &out.report;
            assert!(r.min_r_max <= r.avg_r_max && r.avg_r_max <= r.max_r_max);
            for cl in &r.clusters {
                let max = cl.reduced_by.iter().copied().fold(0.0, f64::max);
                assert_eq!(cl.r_max, max);
                assert!(cl.reduced_by.iter().all(|v| (0.0..=1.0).contains(v)));
            }
            let text = out.centers.to_json().unwrap();
            assert_eq!(ReducerCenters::from_json(&text).unwrap(), out.centers);
        }
    }

    #[test]
    fn single_move_set_has_pure_clusters() {
        let set = nonminimal(4, 80);
        let records = set
            .records
            .into_iter()
            .filter(|r| reducer_mask(&r.word).unwrap() == 1)
            .collect();
        let set = LabeledWordSet::new(2, records).unwrap();
        let map = builtin_map("f2", 2).unwrap();
        let mut cfg = ClusterConfig::new(ClusterInit::Random, 0);
        cfg.sample_fraction = 0.0;
        let out = clustering_experiment(&set, &map, &cfg).unwrap();
        assert!(out.report.clusters.iter().all(|c| c.r_max == 1.0));
    }

    #[test]
    fn nearest_center_prediction() {
        let map = builtin_map("f2", 2).unwrap();
        let words = singletons();
        let centers = ReducerCenters {
            schema_version: CENTERS_SCHEMA_VERSION,
            feature_map: "f2".into(),
            centers: estimate_initial_centers(&words, &map).unwrap(),
            moves: NielsenMove::ALL.to_vec(),
        };
        for (w, t) in words.iter().zip(NielsenMove::ALL) {
            assert_eq!(predict_reducer(w, &centers).unwrap(), t);
        }
        // equidistant: identical centers resolve to the first
        let tied = ReducerCenters {
            centers: vec![centers.centers[0].clone(); 2],
            moves: vec![NielsenMove::BtoBA, NielsenMove::AtoAB],
            ..centers
        };
        assert_eq!(predict_reducer(&words[2], &tied).unwrap(), NielsenMove::BtoBA);
    }
}
