use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::word::{check_rank, push_reduced, CyclicWord, Letter, Word};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum Kind {
    /// Images of the positive generators; a signed permutation.
    Permutation(Vec<Letter>),
    /// The `(A, a)` move. `set` is a bitmask over letter codes.
    Multiplier { multiplier: Letter, set: u64 },
}

/// A Whitehead automorphism of `F(X)`: either a signed permutation of the
/// generators (type I) or a multiplier move `(A, a)` (type II).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WhiteheadAutomorphism {
    rank: usize,
    kind: Kind,
}

impl WhiteheadAutomorphism {
    /// Type I automorphism sending generator `i` to `images[i]`.
    pub fn permutation(images: Vec<Letter>) -> Result<Self> {
        let rank = images.len();
        check_rank(rank)?;
        let mut seen = vec![false; rank];
        for l in &images {
            if l.generator() >= rank {
                return Err(Error::InvalidGenerator {
                    generator: l.generator(),
                    rank,
                });
            }
            if std::mem::replace(&mut seen[l.generator()], true) {
                return Err(Error::InvalidArgument(
                    "permutation images must cover every generator once".into(),
                ));
            }
        }
        Ok(WhiteheadAutomorphism {
            rank,
            kind: Kind::Permutation(images),
        })
    }

    /// Type II automorphism `(A, a)` with `A` given as letters.
    pub fn multiplier(rank: usize, multiplier: Letter, set: &[Letter]) -> Result<Self> {
        let mask = set.iter().fold(0u64, |m, l| m | 1 << l.code());
        Self::multiplier_mask(rank, multiplier, mask)
    }

    pub(crate) fn multiplier_mask(rank: usize, multiplier: Letter, set: u64) -> Result<Self> {
        check_rank(rank)?;
        if multiplier.generator() >= rank || set >> (2 * rank) != 0 {
            return Err(Error::InvalidGenerator {
                generator: multiplier.generator().max(rank),
                rank,
            });
        }
        if set & (1 << multiplier.code()) == 0 || set & (1 << multiplier.inverse().code()) != 0 {
            return Err(Error::InvalidArgument(
                "type II set must contain the multiplier and not its inverse".into(),
            ));
        }
        Ok(WhiteheadAutomorphism {
            rank,
            kind: Kind::Multiplier { multiplier, set },
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_type_one(&self) -> bool {
        matches!(self.kind, Kind::Permutation(_))
    }

    /// `false` for the identity and for inner automorphisms.
    pub fn is_proper(&self) -> bool {
        match &self.kind {
            Kind::Permutation(images) => images
                .iter()
                .enumerate()
                .any(|(i, l)| *l != Letter::pos(i)),
            Kind::Multiplier { multiplier, set } => {
                let all = (1u64 << (2 * self.rank)) - 1;
                let single = 1u64 << multiplier.code();
                let inner = all & !(1u64 << multiplier.inverse().code());
                *set != single && *set != inner
            }
        }
    }

    /// Multiplier and set for type II moves.
    pub fn multiplier_set(&self) -> Option<(Letter, Vec<Letter>)> {
        match &self.kind {
            Kind::Multiplier { multiplier, set } => Some((
                *multiplier,
                Letter::alphabet(self.rank)
                    .filter(|l| set & (1 << l.code()) != 0)
                    .collect(),
            )),
            Kind::Permutation(_) => None,
        }
    }

    /// Image of every letter of `X^{±1}`, indexed by letter code.
    pub fn images(&self) -> Vec<Vec<Letter>> {
        match &self.kind {
            Kind::Permutation(images) => Letter::alphabet(self.rank)
                .map(|x| {
                    let img = images[x.generator()];
                    vec![if x.is_inverse() { img.inverse() } else { img }]
                })
                .collect(),
            Kind::Multiplier { multiplier: a, set } => {
                let inside = |l: Letter| set & (1 << l.code()) != 0;
                Letter::alphabet(self.rank)
                    .map(|x| {
                        if x == *a || x == a.inverse() {
                            return vec![x];
                        }
                        match (inside(x), inside(x.inverse())) {
                            (true, false) => vec![x, *a],
                            (false, true) => vec![a.inverse(), x],
                            (true, true) => vec![a.inverse(), x, *a],
                            (false, false) => vec![x],
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn inverse(&self) -> WhiteheadAutomorphism {
        let kind = match &self.kind {
            Kind::Permutation(images) => {
                let mut inv = vec![Letter::pos(0); self.rank];
                for (i, img) in images.iter().enumerate() {
                    inv[img.generator()] = Letter::new(i, img.is_inverse());
                }
                Kind::Permutation(inv)
            }
            Kind::Multiplier { multiplier, set } => Kind::Multiplier {
                multiplier: multiplier.inverse(),
                set: (set & !(1 << multiplier.code())) | 1 << multiplier.inverse().code(),
            },
        };
        WhiteheadAutomorphism {
            rank: self.rank,
            kind,
        }
    }

    fn check(&self, rank: usize) -> Result<()> {
        if rank != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                actual: rank,
            });
        }
        Ok(())
    }

    pub fn apply_word(&self, w: &Word) -> Result<Word> {
        self.check(w.rank())?;
        let images = self.images();
        Ok(Word::from_reduced(substitute(&images, w.letters()), self.rank))
    }

    /// Cyclically reduced image of a cyclic word.
    pub fn apply(&self, w: &CyclicWord) -> Result<CyclicWord> {
        self.check(w.rank())?;
        let images = self.images();
        Ok(CyclicWord::from_reduced(
            substitute(&images, w.letters()),
            self.rank,
        ))
    }
}

/// Freely reduced concatenation of letter images.
pub(crate) fn substitute(images: &[Vec<Letter>], letters: &[Letter]) -> Vec<Letter> {
    let mut buf = Vec::with_capacity(letters.len() + letters.len() / 2);
    for l in letters {
        for &x in &images[l.code()] {
            push_reduced(&mut buf, x);
        }
    }
    buf
}

/// Cyclic length of the image without building the canonical rotation.
pub(crate) fn image_cyclic_len(images: &[Vec<Letter>], letters: &[Letter]) -> usize {
    let buf = substitute(images, letters);
    buf.len() - 2 * super::word::cyclic_strip(&buf)
}

impl fmt::Display for WhiteheadAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let images = self.images();
        for g in 0..self.rank {
            if g > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}->", Letter::pos(g))?;
            for l in &images[Letter::pos(g).code()] {
                write!(f, "{l}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for WhiteheadAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

/// Every proper type II automorphism of the given rank, ordered by
/// multiplier code and then by the set as a bitmask.
///
/// There are `2n (2^{2n-2} - 2)` of them.
pub fn enumerate_type2(rank: usize) -> Result<Vec<WhiteheadAutomorphism>> {
    check_rank(rank)?;
    let mut out = Vec::new();
    for a in Letter::alphabet(rank) {
        let others: Vec<usize> = Letter::alphabet(rank)
            .filter(|&l| l != a && l != a.inverse())
            .map(Letter::code)
            .collect();
        for sub in 0u64..(1 << others.len()) {
            let mut mask = 1u64 << a.code();
            for (bit, &code) in others.iter().enumerate() {
                if sub >> bit & 1 == 1 {
                    mask |= 1 << code;
                }
            }
            let t = WhiteheadAutomorphism {
                rank,
                kind: Kind::Multiplier {
                    multiplier: a,
                    set: mask,
                },
            };
            if t.is_proper() {
                out.push(t);
            }
        }
    }
    Ok(out)
}

/// The four rank-2 Nielsen moves; together with conjugations they make up
/// all Whitehead automorphisms of `F_2`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NielsenMove {
    /// a ↦ ab
    #[serde(rename = "a->ab")]
    AtoAB,
    /// a ↦ b⁻¹a
    #[serde(rename = "a->Ba")]
    AtoBinvA,
    /// b ↦ ba
    #[serde(rename = "b->ba")]
    BtoBA,
    /// b ↦ a⁻¹b
    #[serde(rename = "b->Ab")]
    BtoAinvB,
}

impl NielsenMove {
    pub const ALL: [NielsenMove; 4] = [
        NielsenMove::AtoAB,
        NielsenMove::AtoBinvA,
        NielsenMove::BtoBA,
        NielsenMove::BtoAinvB,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn to_automorphism(self) -> WhiteheadAutomorphism {
        let (a, b) = (Letter::pos(0), Letter::pos(1));
        let (multiplier, set) = match self {
            NielsenMove::AtoAB => (b, [b, a]),
            NielsenMove::AtoBinvA => (b, [b, a.inverse()]),
            NielsenMove::BtoBA => (a, [a, b]),
            NielsenMove::BtoAinvB => (a, [a, b.inverse()]),
        };
        WhiteheadAutomorphism::multiplier(2, multiplier, &set).expect("valid Nielsen move")
    }

    pub fn name(self) -> &'static str {
        match self {
            NielsenMove::AtoAB => "a->ab",
            NielsenMove::AtoBinvA => "a->Ba",
            NielsenMove::BtoBA => "b->ba",
            NielsenMove::BtoAinvB => "b->Ab",
        }
    }
}

impl fmt::Display for NielsenMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Debug for NielsenMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NielsenMove {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NielsenMove::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown Nielsen move {s:?}")))
    }
}

/// A sequence of automorphisms applied left to right.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct AutomorphismChain(pub Vec<WhiteheadAutomorphism>);

impl AutomorphismChain {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn steps(&self) -> &[WhiteheadAutomorphism] {
        &self.0
    }

    pub fn replay(&self, w: &CyclicWord) -> Result<CyclicWord> {
        let mut cur = w.clone();
        for t in &self.0 {
            cur = t.apply(&cur)?;
        }
        Ok(cur)
    }
}
