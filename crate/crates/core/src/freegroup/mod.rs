//! Words in free groups, Whitehead automorphisms and Whitehead minimization.

mod automorphism;
mod minimize;
mod random;
mod word;

pub use automorphism::{enumerate_type2, AutomorphismChain, NielsenMove, WhiteheadAutomorphism};
pub use minimize::{
    candidate_moves, is_minimal, minimize, reducer_mask, reducing_automorphisms,
    reducing_nielsen_moves,
};
pub use random::{
    random_cyclic_word, random_primitive, random_type1, random_type2, random_whitehead,
    random_word,
};
pub use word::{free_reduce, infer_rank, CyclicWord, Letter, Word, MAX_RANK};
