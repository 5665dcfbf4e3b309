//! Succinct building blocks: bit vectors with Rank/Select, tryte-packed trit
//! arrays with constant-time Rank, and fixed-width packed integers.

mod bits;
mod intvec;
mod trits;

pub use bits::BitVector;
pub use intvec::IntVector;
pub use trits::{trit_get, trit_pack, trit_rank, trit_rank_build, Trit, TritArray, TritRank, DEFAULT_LARGE_BLOCK, DEFAULT_SMALL_BLOCK};
