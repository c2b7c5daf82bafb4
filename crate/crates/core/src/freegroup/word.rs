use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest rank representable in the one-character-per-letter text encoding.
pub const MAX_RANK: usize = 26;

/// A signed generator `x_i^{±1}`.
///
/// Stored as `2 * generator + inverse`, so the derived ordering is generator
/// ascending with the positive letter before its inverse (`a < A < b < B`).
/// The code doubles as a dense index into `X^{±1}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        debug_assert!(generator < MAX_RANK);
        Letter((2 * generator + inverse as usize) as u8)
    }

    pub fn pos(generator: usize) -> Self {
        Self::new(generator, false)
    }

    pub fn neg(generator: usize) -> Self {
        Self::new(generator, true)
    }

    pub fn from_code(code: usize) -> Self {
        debug_assert!(code < 2 * MAX_RANK);
        Letter(code as u8)
    }

    /// Index into the alphabet `X^{±1}` of size `2 * rank`.
    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn sign(self) -> i8 {
        if self.is_inverse() {
            -1
        } else {
            1
        }
    }

    #[inline]
    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.generator() as u8) as char
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'a'..='z' => Ok(Letter::pos(c as usize - 'a' as usize)),
            'A'..='Z' => Ok(Letter::neg(c as usize - 'A' as usize)),
            _ => Err(Error::InvalidCharacter(c)),
        }
    }

    /// All `2 * rank` letters in code order.
    pub fn alphabet(rank: usize) -> impl Iterator<Item = Letter> {
        (0..2 * rank).map(Letter::from_code)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

pub(crate) fn check_rank(rank: usize) -> Result<()> {
    if rank < 2 {
        return Err(Error::RankTooSmall(rank));
    }
    if rank > MAX_RANK {
        return Err(Error::RankTooLarge(rank));
    }
    Ok(())
}

fn check_letters(letters: &[Letter], rank: usize) -> Result<()> {
    match letters.iter().find(|l| l.generator() >= rank) {
        Some(l) => Err(Error::InvalidGenerator {
            generator: l.generator(),
            rank,
        }),
        None => Ok(()),
    }
}

/// Smallest rank (at least 2) whose alphabet covers every letter in `s`.
pub fn infer_rank(s: &str) -> Result<usize> {
    let mut rank = 2;
    for c in s.chars() {
        rank = rank.max(Letter::from_char(c)?.generator() + 1);
    }
    Ok(rank)
}

fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    s.trim().chars().map(Letter::from_char).collect()
}

/// Appends `letter` to a freely reduced buffer, cancelling against the tail.
#[inline]
pub(crate) fn push_reduced(buf: &mut Vec<Letter>, letter: Letter) {
    if buf.last() == Some(&letter.inverse()) {
        buf.pop();
    } else {
        buf.push(letter);
    }
}

/// Number of letters stripped from each end of a freely reduced word to make
/// it cyclically reduced.
pub(crate) fn cyclic_strip(letters: &[Letter]) -> usize {
    let n = letters.len();
    let mut k = 0;
    while 2 * k + 1 < n && letters[k] == letters[n - 1 - k].inverse() {
        k += 1;
    }
    k
}

/// Start index of the lexicographically least rotation.
pub(crate) fn least_rotation(s: &[Letter]) -> usize {
    let n = s.len();
    if n < 2 {
        return 0;
    }
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = s[(i + k) % n];
        let b = s[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

/// A freely reduced word in the free group of the given rank.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    letters: Vec<Letter>,
    rank: usize,
}

/// Freely reduces `raw`, cancelling adjacent `x x^{-1}` pairs.
pub fn free_reduce(raw: &[Letter], rank: usize) -> Result<Word> {
    check_rank(rank)?;
    check_letters(raw, rank)?;
    let mut letters = Vec::with_capacity(raw.len());
    for &l in raw {
        push_reduced(&mut letters, l);
    }
    Ok(Word { letters, rank })
}

impl Word {
    pub fn new(letters: Vec<Letter>, rank: usize) -> Result<Self> {
        free_reduce(&letters, rank)
    }

    pub fn identity(rank: usize) -> Result<Self> {
        check_rank(rank)?;
        Ok(Word {
            letters: Vec::new(),
            rank,
        })
    }

    pub(crate) fn from_reduced(letters: Vec<Letter>, rank: usize) -> Self {
        debug_assert!(letters.windows(2).all(|p| p[0] != p[1].inverse()));
        Word { letters, rank }
    }

    pub fn parse(s: &str, rank: usize) -> Result<Self> {
        free_reduce(&parse_letters(s)?, rank)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
            rank: self.rank,
        }
    }

    /// Reduced product `self · other`.
    pub fn mul(&self, other: &Word) -> Result<Word> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                actual: other.rank,
            });
        }
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut letters, l);
        }
        Ok(Word {
            letters,
            rank: self.rank,
        })
    }

    /// Splits `self = g · c · g^{-1}` with `c` the canonical cyclic core.
    pub fn cyclic_reduce(&self) -> (CyclicWord, Word) {
        let k = cyclic_strip(&self.letters);
        let core = &self.letters[k..self.letters.len() - k];
        let r = least_rotation(core);
        // core = p·q with canonical q·p = p^{-1}·core·p, so w = (g·p)·c·(g·p)^{-1}
        let mut conj = self.letters[..k].to_vec();
        for &l in &core[..r] {
            push_reduced(&mut conj, l);
        }
        let mut canon = Vec::with_capacity(core.len());
        canon.extend_from_slice(&core[r..]);
        canon.extend_from_slice(&core[..r]);
        (
            CyclicWord {
                letters: canon,
                rank: self.rank,
            },
            Word {
                letters: conj,
                rank: self.rank,
            },
        )
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// A cyclically reduced word stored as its least rotation.
///
/// Two cyclic words are equal iff they are conjugate in the free group.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord {
    letters: Vec<Letter>,
    rank: usize,
}

impl CyclicWord {
    /// Cyclic reduction of an arbitrary letter sequence (freely reduced first).
    pub fn new(letters: Vec<Letter>, rank: usize) -> Result<Self> {
        Ok(free_reduce(&letters, rank)?.cyclic_reduce().0)
    }

    pub fn parse(s: &str, rank: usize) -> Result<Self> {
        Self::new(parse_letters(s)?, rank)
    }

    /// Canonicalizes a sequence already known to be freely reduced.
    pub(crate) fn from_reduced(mut letters: Vec<Letter>, rank: usize) -> Self {
        let k = cyclic_strip(&letters);
        if k > 0 {
            letters.truncate(letters.len() - k);
            letters.drain(..k);
        }
        let r = least_rotation(&letters);
        letters.rotate_left(r);
        CyclicWord { letters, rank }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn to_word(&self) -> Word {
        Word::from_reduced(self.letters.clone(), self.rank)
    }

    /// Letter at cyclic position `i` (taken modulo the length).
    #[inline]
    pub fn at(&self, i: usize) -> Letter {
        self.letters[i % self.letters.len()]
    }
}

impl From<&CyclicWord> for Word {
    fn from(c: &CyclicWord) -> Word {
        c.to_word()
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclicWord({self})")
    }
}
