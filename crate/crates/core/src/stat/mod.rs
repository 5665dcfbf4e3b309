//! STAT encoding and the multi-index query pipeline.

mod index;
mod trie;

pub use index::{assign_thresholds, linear_scan, sketch_all, IndexParams, IndexStats, QueryResult, QueryScratch, StatIndex};
pub use trie::{encode_stat, Child, SearchCounters, StatBytes, StatLevel, StatTrie, MAX_STAT_SIGMA};
