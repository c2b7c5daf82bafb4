use super::automorphism::{
    enumerate_type2, image_cyclic_len, substitute, AutomorphismChain, NielsenMove,
    WhiteheadAutomorphism,
};
use super::word::CyclicWord;
use crate::error::{Error, Result};

/// Moves scanned for length reduction: the Nielsen set in rank 2 (conjugations
/// fix cyclic words), every proper type II automorphism otherwise.
pub fn candidate_moves(rank: usize) -> Result<Vec<WhiteheadAutomorphism>> {
    if rank == 2 {
        Ok(NielsenMove::ALL.iter().map(|m| m.to_automorphism()).collect())
    } else {
        enumerate_type2(rank)
    }
}

/// Rank-2 Nielsen moves that strictly shorten `w`.
pub fn reducing_nielsen_moves(w: &CyclicWord) -> Result<Vec<NielsenMove>> {
    let mask = reducer_mask(w)?;
    Ok(NielsenMove::ALL
        .into_iter()
        .filter(|m| mask & (1 << m.index()) != 0)
        .collect())
}

/// Bit `i` set iff `NielsenMove::ALL[i]` shortens `w`.
pub fn reducer_mask(w: &CyclicWord) -> Result<u8> {
    if w.rank() != 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            actual: w.rank(),
        });
    }
    let mut mask = 0u8;
    if w.len() < 2 {
        return Ok(0);
    }
    for m in NielsenMove::ALL {
        let images = m.to_automorphism().images();
        if image_cyclic_len(&images, w.letters()) < w.len() {
            mask |= 1 << m.index();
        }
    }
    Ok(mask)
}

/// All scanned moves `t` with `|t(w)| < |w|`, in enumeration order.
pub fn reducing_automorphisms(w: &CyclicWord) -> Result<Vec<WhiteheadAutomorphism>> {
    if w.len() < 2 {
        return Ok(Vec::new());
    }
    Ok(candidate_moves(w.rank())?
        .into_iter()
        .filter(|t| image_cyclic_len(&t.images(), w.letters()) < w.len())
        .collect())
}

/// Whether `w` has minimal length in its automorphic orbit.
pub fn is_minimal(w: &CyclicWord) -> bool {
    if w.len() < 2 {
        return true;
    }
    let moves = candidate_moves(w.rank()).expect("cyclic words carry a valid rank");
    moves
        .iter()
        .all(|t| image_cyclic_len(&t.images(), w.letters()) >= w.len())
}

/// Greedy steepest descent to a Whitehead-minimal representative.
///
/// Each step applies the move with the largest length reduction (first in
/// enumeration order on ties), so the returned chain is strictly decreasing
/// in length and has at most `|w|` steps.
pub fn minimize(w: &CyclicWord) -> (CyclicWord, AutomorphismChain) {
    let moves = candidate_moves(w.rank()).expect("cyclic words carry a valid rank");
    let images: Vec<_> = moves.iter().map(|t| t.images()).collect();
    let mut cur = w.clone();
    let mut chain = Vec::new();
    while cur.len() >= 2 {
        let mut best: Option<(usize, usize)> = None;
        for (i, img) in images.iter().enumerate() {
            let len = image_cyclic_len(img, cur.letters());
            if len < cur.len() && best.is_none_or(|(_, b)| len < b) {
                best = Some((i, len));
            }
        }
        let Some((i, _)) = best else { break };
        cur = CyclicWord::from_reduced(substitute(&images[i], cur.letters()), cur.rank());
        chain.push(moves[i].clone());
    }
    (cur, AutomorphismChain(chain))
}
