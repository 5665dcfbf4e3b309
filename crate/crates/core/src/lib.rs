//! Trajectory similarity search under the discrete Fréchet distance.
//!
//! Trajectories are mapped to fixed-length integer sketches by randomly
//! shifted grid hashing. Sketches are cut into blocks; each block is indexed
//! by a trie whose light subtrees are collapsed into leaves, and the trie is
//! stored level by level as a succinct trit-array trie (STAT). A query walks
//! every block trie with a small Hamming budget, unions the candidates,
//! verifies them against the stored sketches, and optionally filters the
//! survivors by exact Fréchet distance.
//!
//! ```
//! use tstat::{IndexParams, LshParams, QueryScratch, StatIndex, Trajectory};
//!
//! let trajs: Vec<Trajectory<f64>> = (0..50)
//!     .map(|i| Trajectory::from_flat(i, 2, vec![i as f64, 0.0, i as f64 + 1.0, 1.0]).unwrap())
//!     .collect();
//! let params = IndexParams::new(LshParams::for_radius(0.5, 2, 42), 8, 8).unwrap();
//! let index = StatIndex::build(&trajs, params).unwrap();
//! let mut scratch = QueryScratch::default();
//! let res = index.query_trajectory(&trajs[7], 4, &trajs, 0.5, &mut scratch).unwrap();
//! assert!(res.verified.iter().any(|&(id, d)| id == 7 && d == 0.0));
//! ```

pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod scalar;
pub mod sketch;
pub mod stat;
pub mod succinct;
pub mod synth;
pub mod trie;

pub use error::{Error, Result};
pub use geometry::{frechet_distance, frechet_leq, Point, Trajectory};
pub use scalar::Scalar;
pub use sketch::{encode_vertical, hamming_vertical, make_hashers, snap_curve, GridHasher, LshParams, Sketch, Sketcher, VerticalStore};
pub use stat::{assign_thresholds, encode_stat, Child, IndexParams, IndexStats, QueryResult, QueryScratch, StatIndex, StatTrie};
pub use trie::{bfs_layout, build_trie, reduce, BlockConfig, Trie, TrieStats};

pub type Point64 = Point<f64>;
pub type Point32 = Point<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
