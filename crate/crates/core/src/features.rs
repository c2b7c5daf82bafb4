//! Subword counting functions and feature maps.
//!
//! A [`Pattern`] is an alternating sequence `U_1 v_1 U_2 … v_K U_{K+1}` of
//! wildcard sets and fixed words. Counting a pattern in a word returns the
//! number of distinct subword occurrences (start, end) matching some
//! instantiation. A [`FeatureMap`] is an ordered list of patterns; its value on
//! a word is the vector of counts divided by the word length.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::ops::Deref;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freegroup::{CyclicWord, Letter, Word};

/// A set of wildcard words, identified only by the lengths it admits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum WildcardSet {
    /// Words of length exactly `n`.
    ExactLen(usize),
    /// Words of length at most `n`, including the empty word.
    AtMostLen(usize),
    /// Only the empty word.
    EmptyOnly,
}

impl WildcardSet {
    fn lengths(self) -> (usize, usize) {
        match self {
            WildcardSet::ExactLen(n) => (n, n),
            WildcardSet::AtMostLen(n) => (0, n),
            WildcardSet::EmptyOnly => (0, 0),
        }
    }
}

/// How occurrences are located in a word.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CountMode {
    /// Every rotation start; matches may wrap around but span at most `|w|`.
    Cyclic,
    /// Only subwords of the linear representative.
    Linear,
}

/// `U_1 v_1 U_2 … v_K U_{K+1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    wildcards: Vec<WildcardSet>,
    fixed: Vec<Vec<Letter>>,
}

impl Pattern {
    pub fn new(wildcards: Vec<WildcardSet>, fixed: Vec<Vec<Letter>>) -> Result<Self> {
        if fixed.is_empty() || wildcards.len() != fixed.len() + 1 {
            return Err(Error::InvalidPattern(
                "need K >= 1 fixed words and K + 1 wildcard sets".into(),
            ));
        }
        if fixed.iter().any(|f| f.is_empty()) {
            return Err(Error::InvalidPattern("fixed words must be nonempty".into()));
        }
        Ok(Pattern { wildcards, fixed })
    }

    /// A single fixed word.
    pub fn word(letters: &[Letter]) -> Self {
        assert!(!letters.is_empty());
        Pattern {
            wildcards: vec![WildcardSet::EmptyOnly; 2],
            fixed: vec![letters.to_vec()],
        }
    }

    /// `x1 · U · x2` for single letters.
    pub fn pair(x1: Letter, middle: WildcardSet, x2: Letter) -> Self {
        Pattern {
            wildcards: vec![WildcardSet::EmptyOnly, middle, WildcardSet::EmptyOnly],
            fixed: vec![vec![x1], vec![x2]],
        }
    }

    pub fn fixed_words(&self) -> &[Vec<Letter>] {
        &self.fixed
    }

    pub fn wildcards(&self) -> &[WildcardSet] {
        &self.wildcards
    }

    /// Smallest and largest number of letters an occurrence can cover.
    pub fn span(&self) -> (usize, usize) {
        let fixed: usize = self.fixed.iter().map(Vec::len).sum();
        self.wildcards.iter().fold((fixed, fixed), |(lo, hi), w| {
            let (a, b) = w.lengths();
            (lo + a, hi + b)
        })
    }

    fn max_generator(&self) -> usize {
        self.fixed
            .iter()
            .flatten()
            .map(|l| l.generator())
            .max()
            .unwrap_or(0)
    }

    /// A pattern with exactly one fixed word and no wildcards.
    fn as_word(&self) -> Option<&[Letter]> {
        (self.fixed.len() == 1 && self.wildcards.iter().all(|w| w.lengths() == (0, 0)))
            .then(|| self.fixed[0].as_slice())
    }

    /// `x1 · U_k · x2` with single letters.
    fn as_pair(&self) -> Option<(Letter, usize, Letter)> {
        if self.fixed.len() != 2
            || self.fixed[0].len() != 1
            || self.fixed[1].len() != 1
            || self.wildcards[0].lengths() != (0, 0)
            || self.wildcards[2].lengths() != (0, 0)
        {
            return None;
        }
        match self.wildcards[1].lengths() {
            (a, b) if a == b => Some((self.fixed[0][0], a, self.fixed[1][0])),
            _ => None,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (i, w) in self.wildcards.iter().enumerate() {
            match w {
                WildcardSet::ExactLen(n) => parts.push(format!("U{n}")),
                WildcardSet::AtMostLen(n) => parts.push(format!("W{n}")),
                WildcardSet::EmptyOnly => {}
            }
            if let Some(v) = self.fixed.get(i) {
                parts.push(v.iter().map(|l| l.to_char()).collect());
            }
        }
        f.write_str(&parts.join("."))
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern({self})")
    }
}

impl FromStr for Pattern {
    type Err = Error;

    /// Parses the dotted text form, e.g. `a.U1.b`, `W3.ab`, `Ab`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPattern(s.to_string());
        let mut wildcards = Vec::new();
        let mut fixed = Vec::new();
        let mut pending: Option<WildcardSet> = None;
        for tok in s.trim().split('.') {
            let wild = match tok.as_bytes() {
                [b'U', rest @ ..] | [b'W', rest @ ..]
                    if !rest.is_empty() && rest.iter().all(u8::is_ascii_digit) =>
                {
                    let n: usize = tok[1..].parse().map_err(|_| bad())?;
                    Some(match (tok.as_bytes()[0], n) {
                        (b'U', 0) => WildcardSet::EmptyOnly,
                        (b'U', n) => WildcardSet::ExactLen(n),
                        (_, n) => WildcardSet::AtMostLen(n),
                    })
                }
                _ => None,
            };
            match wild {
                Some(w) => {
                    if pending.replace(w).is_some() {
                        return Err(bad());
                    }
                }
                None => {
                    if tok.is_empty() {
                        return Err(bad());
                    }
                    let letters = tok
                        .chars()
                        .map(Letter::from_char)
                        .collect::<Result<Vec<_>>>()
                        .map_err(|_| bad())?;
                    wildcards.push(pending.take().unwrap_or(WildcardSet::EmptyOnly));
                    fixed.push(letters);
                }
            }
        }
        wildcards.push(pending.take().unwrap_or(WildcardSet::EmptyOnly));
        Pattern::new(wildcards, fixed).map_err(|_| bad())
    }
}

/// Counts occurrences of `pattern` in `letters` by direct enumeration.
///
/// Instantiations must be freely reduced; every subword of a freely
/// (cyclically, in cyclic mode) reduced word is, so the check is implicit.
pub fn count_pattern(letters: &[Letter], pattern: &Pattern, mode: CountMode) -> usize {
    let n = letters.len();
    if n == 0 || pattern.span().0 > n {
        return 0;
    }
    let at = |i: usize| letters[i % n];
    let mut total = 0;
    let mut offsets: Vec<usize> = Vec::new();
    let mut next: Vec<usize> = Vec::new();
    for start in 0..n {
        let max_span = match mode {
            CountMode::Cyclic => n,
            CountMode::Linear => n - start,
        };
        offsets.clear();
        offsets.push(0);
        for (i, w) in pattern.wildcards.iter().enumerate() {
            let (lo, hi) = w.lengths();
            next.clear();
            for &o in &offsets {
                next.extend((o + lo..=o + hi).filter(|&e| e <= max_span));
            }
            next.sort_unstable();
            next.dedup();
            std::mem::swap(&mut offsets, &mut next);
            if let Some(v) = pattern.fixed.get(i) {
                offsets.retain(|&o| {
                    o + v.len() <= max_span
                        && v.iter().enumerate().all(|(j, &l)| at(start + o + j) == l)
                });
                for o in offsets.iter_mut() {
                    *o += v.len();
                }
            }
            if offsets.is_empty() {
                break;
            }
        }
        total += offsets.len();
    }
    total
}

/// Lazily built count tables for one word; amortizes the common pattern
/// shapes (fixed words and `x1·U_k·x2`) across a whole feature map.
struct WordProfile<'a> {
    letters: &'a [Letter],
    alphabet: usize,
    mode: CountMode,
    words: HashMap<usize, Vec<u32>>,
    pairs: HashMap<usize, Vec<u32>>,
}

const TABLE_LIMIT: usize = 1 << 16;

impl<'a> WordProfile<'a> {
    fn new(letters: &'a [Letter], rank: usize, mode: CountMode) -> Self {
        WordProfile {
            letters,
            alphabet: 2 * rank,
            mode,
            words: HashMap::new(),
            pairs: HashMap::new(),
        }
    }

    fn starts(&self, span: usize) -> usize {
        let n = self.letters.len();
        if span > n {
            return 0;
        }
        match self.mode {
            CountMode::Cyclic => n,
            CountMode::Linear => n - span + 1,
        }
    }

    fn word_count(&mut self, v: &[Letter]) -> usize {
        let len = v.len();
        let size = self.alphabet.checked_pow(len as u32).unwrap_or(usize::MAX);
        if size > TABLE_LIMIT || v.iter().any(|l| l.code() >= self.alphabet) {
            return count_pattern(self.letters, &Pattern::word(v), self.mode);
        }
        let starts = self.starts(len);
        let (letters, k) = (self.letters, self.alphabet);
        let table = self.words.entry(len).or_insert_with(|| {
            let n = letters.len();
            let mut t = vec![0u32; size];
            for s in 0..starts {
                let code = (0..len).fold(0, |c, j| c * k + letters[(s + j) % n].code());
                t[code] += 1;
            }
            t
        });
        let code = v.iter().fold(0, |c, l| c * k + l.code());
        table[code] as usize
    }

    fn pair_count(&mut self, x1: Letter, gap: usize, x2: Letter) -> usize {
        let k = self.alphabet;
        if x1.code() >= k || x2.code() >= k {
            return 0;
        }
        let starts = self.starts(gap + 2);
        let letters = self.letters;
        let table = self.pairs.entry(gap).or_insert_with(|| {
            let n = letters.len();
            let mut t = vec![0u32; k * k];
            for s in 0..starts {
                t[letters[s].code() * k + letters[(s + gap + 1) % n].code()] += 1;
            }
            t
        });
        table[x1.code() * k + x2.code()] as usize
    }

    fn count(&mut self, p: &Pattern) -> usize {
        if let Some(v) = p.as_word() {
            self.word_count(v)
        } else if let Some((x1, gap, x2)) = p.as_pair() {
            self.pair_count(x1, gap, x2)
        } else {
            count_pattern(self.letters, p, self.mode)
        }
    }
}

/// Normalized counts `(1/|w|) <C_1(w), …, C_N(w)>`.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// An ordered list of counting functions over a fixed rank.
#[derive(Clone, PartialEq, Debug)]
pub struct FeatureMap {
    name: String,
    rank: usize,
    patterns: Vec<Pattern>,
}

impl FeatureMap {
    pub fn new(name: impl Into<String>, rank: usize, patterns: Vec<Pattern>) -> Result<Self> {
        crate::freegroup::Word::identity(rank)?;
        if let Some(p) = patterns.iter().find(|p| p.max_generator() >= rank) {
            return Err(Error::InvalidPattern(format!("{p} uses a generator beyond rank {rank}")));
        }
        Ok(FeatureMap {
            name: name.into(),
            rank,
            patterns,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn dim(&self) -> usize {
        self.patterns.len()
    }

    /// Canonical text form of every component, in order.
    pub fn component_names(&self) -> Vec<String> {
        self.patterns.iter().map(ToString::to_string).collect()
    }

    /// Raw counts in the given mode.
    pub fn counts(&self, letters: &[Letter], mode: CountMode) -> Vec<usize> {
        let mut profile = WordProfile::new(letters, self.rank, mode);
        self.patterns.iter().map(|p| profile.count(p)).collect()
    }

    /// Cyclic counts divided by the cyclic length.
    pub fn feature_vector(&self, w: &CyclicWord) -> Result<FeatureVector> {
        if w.rank() != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                actual: w.rank(),
            });
        }
        if w.is_empty() {
            return Err(Error::EmptyWord);
        }
        let n = w.len() as f64;
        Ok(FeatureVector(
            self.counts(w.letters(), CountMode::Cyclic)
                .into_iter()
                .map(|c| c as f64 / n)
                .collect(),
        ))
    }

    /// Feature vectors of many words, in input order.
    pub fn feature_matrix(&self, words: &[CyclicWord]) -> Result<Vec<Vec<f64>>> {
        words
            .par_iter()
            .map(|w| self.feature_vector(w).map(FeatureVector::into_inner))
            .collect()
    }

    /// Writes a CSV with a header row of pattern names and one row per word.
    pub fn write_csv<W: Write>(&self, out: &mut W, words: &[CyclicWord]) -> Result<()> {
        writeln!(out, "word,{}", self.component_names().join(","))?;
        for (w, row) in words.iter().zip(self.feature_matrix(words)?) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{w},{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn letters_of(rank: usize) -> Vec<Letter> {
    Letter::alphabet(rank).collect()
}

fn reduced_pairs(rank: usize) -> Vec<Pattern> {
    let xs = letters_of(rank);
    let mut out = Vec::new();
    for &x1 in &xs {
        for &x2 in &xs {
            if x2 != x1.inverse() {
                out.push(Pattern::word(&[x1, x2]));
            }
        }
    }
    out
}

fn gap_pairs(rank: usize, gap: usize) -> Vec<Pattern> {
    let xs = letters_of(rank);
    let mut out = Vec::new();
    for &x1 in &xs {
        for &x2 in &xs {
            out.push(Pattern::pair(x1, WildcardSet::ExactLen(gap), x2));
        }
    }
    out
}

/// Looks up a feature map by name.
///
/// Accepted names: `f0` … `f6`, `fstar` (rank 2 only), `pool:<min>-<max>`
/// (every `x·v·y` with `min ≤ |v| ≤ max`), and `custom:<p1>,<p2>,…` with
/// patterns in dotted text form.
pub fn builtin_map(name: &str, rank: usize) -> Result<FeatureMap> {
    crate::freegroup::Word::identity(rank)?;
    let unknown = || Error::UnknownFeatureMap(name.to_string());
    let patterns = match name {
        "f0" => letters_of(rank).into_iter().map(|x| Pattern::word(&[x])).collect(),
        "f1" => reduced_pairs(rank),
        "f2" => gap_pairs(rank, 1),
        "f3" => gap_pairs(rank, 2),
        "f4" => gap_pairs(rank, 3),
        "f5" => [reduced_pairs(rank), gap_pairs(rank, 1)].concat(),
        "f6" => [
            reduced_pairs(rank),
            gap_pairs(rank, 1),
            gap_pairs(rank, 2),
            gap_pairs(rank, 3),
        ]
        .concat(),
        "fstar" => {
            if rank != 2 {
                return Err(Error::InvalidArgument("fstar is defined for rank 2 only".into()));
            }
            let (a, b) = (Letter::pos(0), Letter::pos(1));
            vec![
                Pattern::word(&[a.inverse(), b]),
                Pattern::word(&[b.inverse(), a]),
            ]
        }
        _ => {
            if let Some(range) = name.strip_prefix("pool:") {
                let (lo, hi) = range.split_once('-').ok_or_else(unknown)?;
                let lo = lo.parse().map_err(|_| unknown())?;
                let hi = hi.parse().map_err(|_| unknown())?;
                pattern_pool(rank, lo, hi)?
            } else if let Some(list) = name.strip_prefix("custom:") {
                list.split(',')
                    .map(str::parse)
                    .collect::<Result<Vec<Pattern>>>()?
            } else {
                return Err(unknown());
            }
        }
    };
    FeatureMap::new(name, rank, patterns)
}

/// Every freely reduced `x1·v·x2` with `min_mid ≤ |v| ≤ max_mid`, as fixed
/// words, ordered by length and then lexicographically.
pub fn pattern_pool(rank: usize, min_mid: usize, max_mid: usize) -> Result<Vec<Pattern>> {
    if min_mid < 1 || min_mid > max_mid {
        return Err(Error::InvalidArgument(format!(
            "pattern pool needs 1 <= min <= max, got {min_mid}-{max_mid}"
        )));
    }
    let xs = letters_of(rank);
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Letter>> = xs.iter().map(|&x| vec![x]).collect();
    for len in 2..=max_mid + 2 {
        layer = layer
            .into_iter()
            .flat_map(|w| {
                let last = *w.last().unwrap();
                xs.iter()
                    .filter(move |x| **x != last.inverse())
                    .map(move |&x| {
                        let mut v = w.clone();
                        v.push(x);
                        v
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        if len >= min_mid + 2 {
            out.extend(layer.iter().map(|w| Pattern::word(w)));
        }
    }
    Ok(out)
}

/// An edge `x --v--> y` weighted by `C(w, x v y)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GraphEdge {
    pub from: Letter,
    pub label: Vec<Letter>,
    pub to: Letter,
    pub weight: usize,
}

/// Weighted labelled digraph on `X^{±1}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WhiteheadGraph {
    pub rank: usize,
    /// Positive-weight edges sorted by (from, to, label length, label).
    pub edges: Vec<GraphEdge>,
}

impl WhiteheadGraph {
    pub fn vertex_count(&self) -> usize {
        2 * self.rank
    }

    pub fn weight(&self, from: Letter, label: &[Letter], to: Letter) -> usize {
        self.edges
            .iter()
            .find(|e| e.from == from && e.to == to && e.label == label)
            .map_or(0, |e| e.weight)
    }
}

/// Edges for all labels of length at most `max_label_len`, from cyclic
/// subword counts.
pub fn whitehead_graph(w: &CyclicWord, max_label_len: usize) -> WhiteheadGraph {
    let n = w.len();
    let mut weights: BTreeMap<(Letter, Letter, usize, Vec<Letter>), usize> = BTreeMap::new();
    for span in 2..=(max_label_len + 2).min(n) {
        for s in 0..n {
            let label: Vec<Letter> = (1..span - 1).map(|j| w.at(s + j)).collect();
            *weights
                .entry((w.at(s), w.at(s + span - 1), label.len(), label))
                .or_default() += 1;
        }
    }
    WhiteheadGraph {
        rank: w.rank(),
        edges: weights
            .into_iter()
            .map(|((from, to, _, label), weight)| GraphEdge {
                from,
                label,
                to,
                weight,
            })
            .collect(),
    }
}

/// Convenience: counts in a linear (not cyclic) word.
pub fn count_in_word(w: &Word, pattern: &Pattern) -> usize {
    count_pattern(w.letters(), pattern, CountMode::Linear)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(s: &str) -> CyclicWord {
        CyclicWord::parse(s, 2).unwrap()
    }

    fn p(s: &str) -> Pattern {
        s.parse().unwrap()
    }

    /// Oracle: enumerate every cyclic subword explicitly as a string and
    /// compare against all instantiations of a single-wildcard pattern.
    fn brute_cyclic(w: &str, x1: char, gap: usize, x2: char) -> usize {
        let chars: Vec<char> = w.chars().collect();
        let n = chars.len();
        if gap + 2 > n {
            return 0;
        }
        (0..n)
            .filter(|&s| chars[s] == x1 && chars[(s + gap + 1) % n] == x2)
            .count()
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_pattern(c("abab").letters(), &p("ab"), CountMode::Cyclic), 2);
        assert_eq!(count_pattern(c("abab").letters(), &p("a.U1.a"), CountMode::Cyclic), 2);
        let w = c("aabAbbbAB");
        let total: usize = Letter::alphabet(2)
            .map(|x| count_pattern(w.letters(), &Pattern::word(&[x]), CountMode::Cyclic))
            .sum();
        assert_eq!(total, w.len());
        // span longer than the word
        assert_eq!(count_pattern(c("ab").letters(), &p("a.U3.b"), CountMode::Cyclic), 0);
    }

    #[test]
    fn at_most_wildcards_count_distinct_subwords() {
        // a W1 b in "ab": only "ab" (middle empty); "a?b" would need span 3
        assert_eq!(count_pattern(c("ab").letters(), &p("a.W1.b"), CountMode::Cyclic), 1);
        // in aabb (cyclic): ab at 1; a?b: "abb"? no - a,a,b,b: s=0 "aab" ends b: yes; s=1 "abb": yes
        assert_eq!(count_pattern(c("aabb").letters(), &p("a.W1.b"), CountMode::Cyclic), 3);
    }

    #[test]
    fn pattern_text_roundtrip() {
        for s in ["a.U1.b", "Ab", "W3.ab.U2.B", "a.b", "a.W3.B"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!("U1.U2.a".parse::<Pattern>().is_err());
        assert!("U1".parse::<Pattern>().is_err());
        assert!("a..b".parse::<Pattern>().is_err());
    }

    #[test]
    fn feature_vector_examples() {
        let f0 = builtin_map("f0", 2).unwrap();
        assert_eq!(f0.feature_vector(&c("abab")).unwrap().0, vec![0.5, 0.0, 0.5, 0.0]);
        let fs = builtin_map("fstar", 2).unwrap();
        assert_eq!(fs.feature_vector(&c("AbAb")).unwrap().0, vec![0.5, 0.0]);
        assert_eq!(fs.component_names(), vec!["Ab", "Ba"]);
        assert!(matches!(f0.feature_vector(&c("")), Err(Error::EmptyWord)));
    }

    #[test]
    fn builtin_dimensions() {
        let dims: Vec<usize> = ["f0", "f1", "f2", "f3", "f4", "f5", "f6", "fstar"]
            .iter()
            .map(|n| builtin_map(n, 2).unwrap().dim())
            .collect();
        assert_eq!(dims, vec![4, 12, 16, 16, 16, 28, 60, 2]);
        assert_eq!(builtin_map("f1", 3).unwrap().dim(), 30);
        assert!(matches!(builtin_map("f9", 2), Err(Error::UnknownFeatureMap(_))));
        assert!(builtin_map("fstar", 3).is_err());
        assert_eq!(builtin_map("pool:1-1", 2).unwrap().dim(), 36);
        assert_eq!(builtin_map("custom:a.U1.b,Ab", 2).unwrap().dim(), 2);
        assert_eq!(builtin_map("f2", 2).unwrap().component_names()[1], "a.U1.A");
    }

    #[test]
    fn pool_sizes() {
        assert_eq!(pattern_pool(2, 1, 3).unwrap().len(), 468);
        assert_eq!(pattern_pool(2, 1, 1).unwrap().len(), 36);
        // 6 * 5^(L-1) reduced words of length L in rank 3
        assert_eq!(pattern_pool(3, 2, 2).unwrap().len(), 6 * 125);
        assert!(pattern_pool(2, 0, 1).is_err());
        assert!(pattern_pool(2, 3, 1).is_err());
    }

    #[test]
    fn pool_brute_force_matches() {
        // oracle: all 4-letter strings over aAbB with no adjacent inverse pair, lengths 3..=5
        let alpha = ['a', 'A', 'b', 'B'];
        let inv = |x: char| if x.is_lowercase() { x.to_ascii_uppercase() } else { x.to_ascii_lowercase() };
        let mut expected = Vec::new();
        for len in 3..=5usize {
            let mut words: Vec<String> = vec![String::new()];
            for _ in 0..len {
                words = words
                    .into_iter()
                    .flat_map(|w| {
                        alpha
                            .iter()
                            .filter(|&&x| w.chars().last().is_none_or(|l| x != inv(l)))
                            .map(|&x| format!("{w}{x}"))
                            .collect::<Vec<_>>()
                    })
                    .collect();
            }
            expected.extend(words);
        }
        let got: Vec<String> = pattern_pool(2, 1, 3).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn whitehead_graph_examples() {
        let g = whitehead_graph(&c("abab"), 0);
        let (a, b) = (Letter::pos(0), Letter::pos(1));
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.weight(a, &[], b), 2);
        assert_eq!(g.weight(b, &[], a), 2);
        assert_eq!(g.vertex_count(), 4);

        let g = whitehead_graph(&c("abAB"), 1);
        assert_eq!(g.weight(a, &[b], a.inverse()), 1);
        let zero_label: usize = g.edges.iter().filter(|e| e.label.is_empty()).map(|e| e.weight).sum();
        assert_eq!(zero_label, 4);
    }

    #[test]
    fn gap_counts_match_string_oracle() {
        let w = "aabAbbaBBAba";
        let cw = c(w);
        // cw is a rotation of w, and cyclic counts are rotation-invariant
        for gap in 0..4 {
            for x1 in ['a', 'A', 'b', 'B'] {
                for x2 in ['a', 'A', 'b', 'B'] {
                    let pat = Pattern::pair(
                        Letter::from_char(x1).unwrap(),
                        WildcardSet::ExactLen(gap),
                        Letter::from_char(x2).unwrap(),
                    );
                    let fast = FeatureMap::new("t", 2, vec![pat.clone()])
                        .unwrap()
                        .counts(cw.letters(), CountMode::Cyclic)[0];
                    assert_eq!(fast, brute_cyclic(w, x1, gap, x2));
                    assert_eq!(count_pattern(cw.letters(), &pat, CountMode::Cyclic), fast);
                }
            }
        }
    }

    fn arb_cyclic(max_len: usize) -> impl Strategy<Value = CyclicWord> {
        proptest::collection::vec(0usize..4, 1..max_len)
            .prop_map(|codes| CyclicWord::new(codes.into_iter().map(Letter::from_code).collect(), 2).unwrap())
            .prop_filter("nonempty", |w| !w.is_empty())
    }

    fn arb_pattern() -> impl Strategy<Value = Pattern> {
        let wild = prop_oneof![
            Just(WildcardSet::EmptyOnly),
            (1usize..3).prop_map(WildcardSet::ExactLen),
            (0usize..3).prop_map(WildcardSet::AtMostLen),
        ];
        let word = proptest::collection::vec(0usize..4, 1..3)
            .prop_map(|v| v.into_iter().map(Letter::from_code).collect::<Vec<_>>());
        (proptest::collection::vec(wild, 2..4), proptest::collection::vec(word, 2))
            .prop_map(|(ws, fs)| {
                let k = ws.len() - 1;
                Pattern::new(ws, fs.into_iter().cycle().take(k).collect()).unwrap()
            })
    }

    proptest! {
        #[test]
        fn cyclic_counts_rotation_invariant(w in arb_cyclic(16), pat in arb_pattern(), r in 0usize..16) {
            let mut rotated = w.letters().to_vec();
            let k = r % rotated.len();
            rotated.rotate_left(k);
            prop_assert_eq!(
                count_pattern(w.letters(), &pat, CountMode::Cyclic),
                count_pattern(&rotated, &pat, CountMode::Cyclic)
            );
        }

        #[test]
        fn linear_and_cyclic_counts_bracket(w in arb_cyclic(16), pat in arb_pattern()) {
            let lin = count_pattern(w.letters(), &pat, CountMode::Linear);
            let cyc = count_pattern(w.letters(), &pat, CountMode::Cyclic);
            let (lo, hi) = pat.span();
            prop_assert!(lin <= cyc);
            if lo == hi {
                prop_assert!(cyc <= lin + hi.saturating_sub(1));
            } else {
                // each wrapping start can end at most hi - lo + 1 ways
                prop_assert!(cyc <= lin + hi.saturating_sub(1) * (hi - lo + 1));
            }
        }

        #[test]
        fn fast_path_agrees_with_enumeration(w in arb_cyclic(20)) {
            let map = builtin_map("f6", 2).unwrap();
            let fast = map.counts(w.letters(), CountMode::Cyclic);
            let slow: Vec<usize> = map.patterns().iter().map(|p| count_pattern(w.letters(), p, CountMode::Cyclic)).collect();
            prop_assert_eq!(&fast, &slow);
            let fast = map.counts(w.letters(), CountMode::Linear);
            let slow: Vec<usize> = map.patterns().iter().map(|p| count_pattern(w.letters(), p, CountMode::Linear)).collect();
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn partition_identity(w in arb_cyclic(24), gap in 0usize..4) {
            prop_assume!(w.len() >= gap + 2);
            let total: usize = gap_pairs(2, gap).iter().map(|p| count_pattern(w.letters(), p, CountMode::Cyclic)).sum();
            prop_assert_eq!(total, w.len());
        }

        #[test]
        fn f0_sums_to_one(w in arb_cyclic(30)) {
            let f = builtin_map("f0", 2).unwrap().feature_vector(&w).unwrap();
            prop_assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(f.iter().all(|v| *v >= 0.0 && v.is_finite()));
        }
    }
}
