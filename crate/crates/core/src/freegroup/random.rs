use rand::Rng;

use super::automorphism::WhiteheadAutomorphism;
use super::word::{check_rank, CyclicWord, Letter, Word};
use crate::error::Result;

fn uniform_letter<R: Rng + ?Sized>(rank: usize, rng: &mut R) -> Letter {
    Letter::from_code(rng.gen_range(0..2 * rank))
}

/// Uniform letter from `X^{±1}` avoiding `forbidden`.
fn letter_except<R: Rng + ?Sized>(rank: usize, forbidden: Letter, rng: &mut R) -> Letter {
    let code = rng.gen_range(0..2 * rank - 1);
    Letter::from_code(if code >= forbidden.code() { code + 1 } else { code })
}

/// Random freely reduced word of exactly `length` letters.
///
/// `y_1` is uniform on `X^{±1}` and each `y_{i+1}` is uniform on
/// `X^{±1} \ {y_i^{-1}}`. With `cyclic` set, the last letter is resampled
/// until it also differs from `y_1^{-1}`. Length 0 yields the empty word.
pub fn random_word<R: Rng + ?Sized>(
    length: usize,
    rank: usize,
    cyclic: bool,
    rng: &mut R,
) -> Result<Word> {
    check_rank(rank)?;
    if length == 0 {
        log::debug!("random_word called with length 0; returning the identity");
        return Word::identity(rank);
    }
    let mut letters = Vec::with_capacity(length);
    letters.push(uniform_letter(rank, rng));
    for i in 1..length {
        let prev = letters[i - 1];
        let next = if cyclic && i == length - 1 {
            loop {
                let l = letter_except(rank, prev.inverse(), rng);
                if l != letters[0].inverse() {
                    break l;
                }
            }
        } else {
            letter_except(rank, prev.inverse(), rng)
        };
        letters.push(next);
    }
    Ok(Word::from_reduced(letters, rank))
}

/// Random cyclically reduced word of exactly `length` letters.
pub fn random_cyclic_word<R: Rng + ?Sized>(
    length: usize,
    rank: usize,
    rng: &mut R,
) -> Result<CyclicWord> {
    let w = random_word(length, rank, true, rng)?;
    Ok(CyclicWord::from_reduced(w.letters().to_vec(), rank))
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Uniform draw from the proper Whitehead automorphisms: non-identity signed
/// permutations together with proper type II moves.
pub fn random_whitehead<R: Rng + ?Sized>(rank: usize, rng: &mut R) -> Result<WhiteheadAutomorphism> {
    check_rank(rank)?;
    let type1 = (1u128 << rank) * factorial(rank) - 1;
    let type2 = (2 * rank as u128) * ((1u128 << (2 * rank - 2)) - 2);
    if rng.gen_range(0..type1 + type2) < type1 {
        random_type1(rank, rng)
    } else {
        random_type2(rank, rng)
    }
}

/// Uniform non-identity signed permutation of the generators.
pub fn random_type1<R: Rng + ?Sized>(rank: usize, rng: &mut R) -> Result<WhiteheadAutomorphism> {
    use rand::seq::SliceRandom;
    loop {
        let mut perm: Vec<usize> = (0..rank).collect();
        perm.shuffle(rng);
        let images: Vec<Letter> = perm
            .into_iter()
            .map(|g| Letter::new(g, rng.gen_bool(0.5)))
            .collect();
        let t = WhiteheadAutomorphism::permutation(images)?;
        if t.is_proper() {
            return Ok(t);
        }
    }
}

/// Uniform proper type II automorphism.
pub fn random_type2<R: Rng + ?Sized>(rank: usize, rng: &mut R) -> Result<WhiteheadAutomorphism> {
    check_rank(rank)?;
    loop {
        let a = uniform_letter(rank, rng);
        let mut mask = 1u64 << a.code();
        for l in Letter::alphabet(rank) {
            if l != a && l != a.inverse() && rng.gen_bool(0.5) {
                mask |= 1 << l.code();
            }
        }
        let t = WhiteheadAutomorphism::multiplier_mask(rank, a, mask)?;
        if t.is_proper() {
            return Ok(t);
        }
    }
}

/// Image of a uniformly random letter under `num_autos` random proper
/// Whitehead automorphisms.
pub fn random_primitive<R: Rng + ?Sized>(
    rank: usize,
    num_autos: usize,
    rng: &mut R,
) -> Result<CyclicWord> {
    check_rank(rank)?;
    let mut w = CyclicWord::from_reduced(vec![uniform_letter(rank, rng)], rank);
    for _ in 0..num_autos {
        w = random_whitehead(rank, rng)?.apply(&w)?;
    }
    Ok(w)
}
