use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freegroup::{
    enumerate_type2, infer_rank, is_minimal, minimize, random_cyclic_word, random_whitehead,
    CyclicWord, Letter, WhiteheadAutomorphism,
};

/// Draws of a length-increasing automorphism before giving up on a word.
pub const SUBSTITUTION_DRAWS: usize = 100;
/// Random automorphisms applied while growing one primitive element.
pub const PRIMITIVE_STEP_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DatasetKind {
    D,
    Se,
    SR,
    SP,
    S10,
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DatasetKind::D => "D",
            DatasetKind::Se => "Se",
            DatasetKind::SR => "SR",
            DatasetKind::SP => "SP",
            DatasetKind::S10 => "S10",
        };
        f.write_str(s)
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" => Ok(DatasetKind::D),
            "Se" => Ok(DatasetKind::Se),
            "SR" => Ok(DatasetKind::SR),
            "SP" => Ok(DatasetKind::SP),
            "S10" => Ok(DatasetKind::S10),
            _ => Err(Error::InvalidArgument(format!("unknown dataset kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub rank: usize,
    pub max_length: usize,
    /// Words per length for `D`, `Se` and `S10`.
    pub per_length: usize,
    /// Record count for `SR` and `SP`.
    pub size: usize,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn new(kind: DatasetKind, rank: usize, max_length: usize, seed: u64) -> Self {
        DatasetSpec {
            kind,
            rank,
            max_length,
            per_length: 10,
            size: 5000,
            seed,
        }
    }

    pub fn records(&self) -> usize {
        match self.kind {
            DatasetKind::D | DatasetKind::Se | DatasetKind::S10 => self.max_length * self.per_length,
            DatasetKind::SR | DatasetKind::SP => self.size,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Minimal,
    Nonminimal,
}

impl Label {
    /// Class index: minimal words are class 1, nonminimal words class 2.
    pub fn class(self) -> usize {
        match self {
            Label::Minimal => 1,
            Label::Nonminimal => 2,
        }
    }

    pub fn from_class(c: usize) -> Result<Self> {
        match c {
            1 => Ok(Label::Minimal),
            2 => Ok(Label::Nonminimal),
            _ => Err(Error::InvalidArgument(format!("class {c} is not 1 or 2"))),
        }
    }

    pub fn of(w: &CyclicWord) -> Self {
        if is_minimal(w) {
            Label::Minimal
        } else {
            Label::Nonminimal
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Minimal => "min",
            Label::Nonminimal => "nonmin",
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Label::Minimal),
            "nonmin" => Ok(Label::Nonminimal),
            _ => Err(Error::Data(format!("unknown label {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordRecord {
    pub word: CyclicWord,
    pub label: Label,
}

impl WordRecord {
    pub fn length(&self) -> usize {
        self.word.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledWordSet {
    pub rank: usize,
    pub records: Vec<WordRecord>,
}

impl LabeledWordSet {
    pub fn new(rank: usize, records: Vec<WordRecord>) -> Result<Self> {
        if let Some(r) = records.iter().find(|r| r.word.rank() != rank) {
            return Err(Error::RankMismatch {
                expected: rank,
                actual: r.word.rank(),
            });
        }
        Ok(LabeledWordSet { rank, records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn words(&self) -> Vec<CyclicWord> {
        self.records.iter().map(|r| r.word.clone()).collect()
    }

    pub fn classes(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.label.class()).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    pub fn filter(&self, label: Label) -> LabeledWordSet {
        LabeledWordSet {
            rank: self.rank,
            records: self.records.iter().filter(|r| r.label == label).cloned().collect(),
        }
    }

    /// Index of the first record whose label disagrees with [`is_minimal`].
    pub fn first_unsound(&self) -> Option<usize> {
        self.records
            .par_iter()
            .position_first(|r| Label::of(&r.word) != r.label)
    }

    /// Writes the tab-separated form: a `#` header line, then
    /// `word<TAB>label<TAB>length` rows.
    pub fn write_tsv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "#word\tlabel\tlength\trank={}", self.rank)?;
        for r in &self.records {
            writeln!(out, "{}\t{}\t{}", r.word, r.label.as_str(), r.length())?;
        }
        Ok(())
    }

    pub fn to_tsv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Reads the tab-separated form. The rank comes from a `rank=` entry in
    /// a header line, or else the largest generator used (at least 2). A
    /// nonempty word must already be cyclically reduced.
    pub fn read_tsv<R: BufRead>(input: R) -> Result<Self> {
        let mut rank: Option<usize> = None;
        let mut rows: Vec<(usize, String, Label, usize)> = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if let Some(header) = line.strip_prefix('#') {
                for field in header.split(|c: char| c.is_whitespace()) {
                    if let Some(v) = field.strip_prefix("rank=") {
                        rank = Some(v.parse().map_err(|_| {
                            Error::Data(format!("line {lineno}: bad rank {v:?}"))
                        })?);
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 {
                return Err(Error::Data(format!("line {lineno}: expected word and label")));
            }
            let label: Label = cols[1].trim().parse().map_err(|e| Error::Data(format!("line {lineno}: {e}")))?;
            let length = match cols.get(2) {
                Some(l) => l
                    .trim()
                    .parse()
                    .map_err(|_| Error::Data(format!("line {lineno}: bad length {l:?}")))?,
                None => cols[0].trim().len(),
            };
            rows.push((lineno, cols[0].trim().to_string(), label, length));
        }
        let rank = match rank {
            Some(r) => r,
            None => rows.iter().try_fold(2, |acc, (lineno, w, _, _)| {
                infer_rank(w)
                    .map(|r| acc.max(r))
                    .map_err(|e| Error::Data(format!("line {lineno}: {e}")))
            })?,
        };
        let records = rows
            .into_iter()
            .map(|(lineno, w, label, length)| {
                let word = CyclicWord::parse(&w, rank)
                    .map_err(|e| Error::Data(format!("line {lineno}: {e}")))?;
                if word.len() != w.len() {
                    return Err(Error::Data(format!(
                        "line {lineno}: {w:?} is not cyclically reduced"
                    )));
                }
                if word.len() != length {
                    return Err(Error::Data(format!(
                        "line {lineno}: length column {length} but word has {} letters",
                        word.len()
                    )));
                }
                Ok(WordRecord { word, label })
            })
            .collect::<Result<Vec<_>>>()?;
        LabeledWordSet::new(rank, records)
    }
}

fn record_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Applies a uniformly drawn move from `moves` that strictly lengthens `v`,
/// trying at most [`SUBSTITUTION_DRAWS`] times.
fn lengthen<R: Rng>(v: &CyclicWord, moves: &[WhiteheadAutomorphism], rng: &mut R) -> Option<CyclicWord> {
    (0..SUBSTITUTION_DRAWS).find_map(|_| {
        let t = &moves[rng.gen_range(0..moves.len())];
        let w = t.apply(v).expect("rank checked");
        (w.len() > v.len()).then_some(w)
    })
}

fn whitehead_record<R: Rng>(
    length: usize,
    rank: usize,
    steps: Option<usize>,
    moves: &[WhiteheadAutomorphism],
    rng: &mut R,
) -> Result<WordRecord> {
    let u = random_cyclic_word(length, rank, rng)?;
    let (v, _) = minimize(&u);
    if v.len() < length {
        log::trace!("word of length {length} minimized to length {}", v.len());
    }
    if !rng.gen_bool(0.5) {
        return Ok(WordRecord {
            word: v,
            label: Label::Minimal,
        });
    }
    let steps = steps.map_or(1, |max| rng.gen_range(1..=max));
    let mut w = v.clone();
    for step in 0..steps {
        match lengthen(&w, moves, rng) {
            Some(next) => w = next,
            None => {
                log::warn!(
                    "no lengthening automorphism for {w} after {SUBSTITUTION_DRAWS} draws (step {})",
                    step + 1
                );
                break;
            }
        }
    }
    let label = if w.len() > v.len() {
        Label::Nonminimal
    } else {
        Label::Minimal
    };
    Ok(WordRecord { word: w, label })
}

fn primitive_record<R: Rng>(max_length: usize, rank: usize, rng: &mut R) -> Result<WordRecord> {
    let target = rng.gen_range(1..=max_length);
    let mut w = CyclicWord::new(vec![Letter::new(rng.gen_range(0..rank), rng.gen_bool(0.5))], rank)?;
    let mut steps = 0;
    while w.len() < target {
        if steps == PRIMITIVE_STEP_CAP {
            log::warn!("primitive stopped at length {} short of {target}", w.len());
            break;
        }
        w = random_whitehead(rank, rng)?.apply(&w)?;
        steps += 1;
    }
    let label = Label::of(&w);
    Ok(WordRecord { word: w, label })
}

/// Generates a labelled word set. Every record draws from its own stream of
/// the seeded generator, so output does not depend on thread count.
///
/// * `D`, `Se`: for each length `1..=L`, `per_length` random cyclically
///   reduced words are minimized; each is then, with probability ½, replaced
///   by its image under a random type II automorphism that lengthens it.
/// * `S10`: as `D`, with a uniform number in `1..=10` of lengthening moves.
/// * `SR`: random cyclically reduced words of uniform length in `1..=L`,
///   labelled by [`is_minimal`].
/// * `SP`: random primitive elements grown to a uniform target length in
///   `1..=L`, labelled by [`is_minimal`].
pub fn generate_dataset(spec: &DatasetSpec) -> Result<LabeledWordSet> {
    if spec.max_length == 0 {
        return Err(Error::InvalidArgument("max length must be at least 1".into()));
    }
    let moves = enumerate_type2(spec.rank)?;
    let n = spec.records();
    let records = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = record_rng(spec.seed, i);
            match spec.kind {
                DatasetKind::D | DatasetKind::Se => {
                    whitehead_record(i / spec.per_length + 1, spec.rank, None, &moves, &mut rng)
                }
                DatasetKind::S10 => {
                    whitehead_record(i / spec.per_length + 1, spec.rank, Some(10), &moves, &mut rng)
                }
                DatasetKind::SR => {
                    let length = rng.gen_range(1..=spec.max_length);
                    let word = random_cyclic_word(length, spec.rank, &mut rng)?;
                    let label = Label::of(&word);
                    Ok(WordRecord { word, label })
                }
                DatasetKind::SP => primitive_record(spec.max_length, spec.rank, &mut rng),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledWordSet::new(spec.rank, records)
}
