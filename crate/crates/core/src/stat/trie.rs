//! Succinct trit-array trie: per level, `H` (child kinds, a trit per
//! `(internal node, symbol)` slot), `G` (unary leaf sizes), and `V` (ids).

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::succinct::{BitVector, IntVector, TritArray, TritRank, DEFAULT_LARGE_BLOCK, DEFAULT_SMALL_BLOCK};
use crate::trie::{Trie, TrieStats};

const ABSENT: u8 = 0;
const INTERNAL: u8 = 1;
const LEAF: u8 = 2;

/// Largest alphabet a STAT may be built over.
pub const MAX_STAT_SIGMA: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Child {
    Absent,
    Internal(usize),
    Leaf(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatLevel {
    h: TritArray,
    h_rank: TritRank,
    g: BitVector,
    v: IntVector,
}

impl StatLevel {
    pub fn h(&self) -> &TritArray {
        &self.h
    }

    pub fn h_rank(&self) -> &TritRank {
        &self.h_rank
    }

    pub fn g(&self) -> &BitVector {
        &self.g
    }

    pub fn v(&self) -> &IntVector {
        &self.v
    }
}

/// Byte counts of one STAT, split by array.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StatBytes {
    pub h: usize,
    pub h_rank: usize,
    pub g: usize,
    pub v: usize,
}

impl StatBytes {
    pub fn total(&self) -> usize {
        self.h + self.h_rank + self.g + self.v
    }
}

impl std::ops::AddAssign for StatBytes {
    fn add_assign(&mut self, o: Self) {
        self.h += o.h;
        self.h_rank += o.h_rank;
        self.g += o.g;
        self.v += o.v;
    }
}

/// Counters accumulated by [`StatTrie::search`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchCounters {
    pub nodes_visited: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatTrie {
    sigma: usize,
    levels: Vec<StatLevel>,
    stats: TrieStats,
}

impl StatTrie {
    /// Encodes `trie` (reduced or not) over alphabet `[0, sigma)`.
    pub fn encode(trie: &Trie, sigma: usize) -> Result<Self> {
        if !(2..=MAX_STAT_SIGMA).contains(&sigma) {
            return Err(Error::InvalidParam(format!(
                "STAT alphabet must be in [2, {MAX_STAT_SIGMA}], got {sigma}"
            )));
        }
        let n = trie.root().weight as u64;
        let width = IntVector::width_for(n);
        let mut levels = Vec::with_capacity(trie.depth() + 1);
        for layout in trie.bfs_layout() {
            let mut h = vec![ABSENT; layout.internal.len() * sigma];
            for (i, &u) in layout.internal.iter().enumerate() {
                for &(label, child) in &trie.node(u).children {
                    if label as usize >= sigma {
                        return Err(Error::InvalidInput(format!("edge label {label} outside alphabet {sigma}")));
                    }
                    h[i * sigma + label as usize] = if trie.node(child).is_leaf() { LEAF } else { INTERNAL };
                }
            }
            let h = TritArray::from_trits(h)?;
            let h_rank = TritRank::compact(&h, DEFAULT_LARGE_BLOCK, DEFAULT_SMALL_BLOCK)?;
            let mut g = Vec::new();
            let mut v = IntVector::with_width(width);
            for &u in &layout.leaves {
                let ids = &trie.node(u).ids;
                g.push(true);
                g.extend(std::iter::repeat(false).take(ids.len() - 1));
                for &id in ids {
                    v.push(id as u64)?;
                }
            }
            levels.push(StatLevel { h, h_rank, g: BitVector::from_bits(g), v });
        }
        Ok(Self { sigma, levels, stats: trie.stats() })
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    /// Sub-sketch length.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[StatLevel] {
        &self.levels
    }

    pub fn stats(&self) -> &TrieStats {
        &self.stats
    }

    pub fn internal_count(&self, level: usize) -> usize {
        self.levels[level].h.len() / self.sigma
    }

    pub fn leaf_count(&self, level: usize) -> usize {
        self.levels[level].g.count_ones()
    }

    fn level(&self, level: usize) -> Result<&StatLevel> {
        self.levels.get(level).ok_or(Error::OutOfBounds { index: level, len: self.levels.len() })
    }

    /// Child of internal node `i` at `level` along edge `c`.
    pub fn child(&self, level: usize, i: usize, c: usize) -> Result<Child> {
        let lv = self.level(level)?;
        let count = self.internal_count(level);
        if i >= count {
            return Err(Error::OutOfBounds { index: i, len: count });
        }
        if c >= self.sigma {
            return Err(Error::OutOfBounds { index: c, len: self.sigma });
        }
        Ok(Self::child_in(lv, i * self.sigma + c))
    }

    #[inline]
    fn child_in(lv: &StatLevel, pos: usize) -> Child {
        match lv.h.get_unchecked(pos) {
            INTERNAL => Child::Internal(lv.h_rank.rank_unchecked(&lv.h, INTERNAL, pos)),
            LEAF => Child::Leaf(lv.h_rank.rank_unchecked(&lv.h, LEAF, pos)),
            _ => Child::Absent,
        }
    }

    /// Position range in `V` of leaf `i` at `level`.
    pub fn leaf_range(&self, level: usize, i: usize) -> Result<std::ops::Range<usize>> {
        let lv = self.level(level)?;
        let count = self.leaf_count(level);
        if i >= count {
            return Err(Error::OutOfBounds { index: i, len: count });
        }
        Ok(Self::leaf_range_in(lv, i))
    }

    #[inline]
    fn leaf_range_in(lv: &StatLevel, i: usize) -> std::ops::Range<usize> {
        // occurrence indices are zero-based; select past the last one yields len(G)
        lv.g.select(true, i)..lv.g.select(true, i + 1)
    }

    /// Sketch ids of leaf `i` at `level`.
    pub fn leaf_ids(&self, level: usize, i: usize) -> Result<Vec<u32>> {
        let range = self.leaf_range(level, i)?;
        let v = &self.levels[level].v;
        Ok(range.map(|p| v.get(p) as u32).collect())
    }

    fn push_leaf(&self, level: usize, i: usize, out: &mut Vec<u32>) -> usize {
        let lv = &self.levels[level];
        let range = Self::leaf_range_in(lv, i);
        let n = range.len();
        out.extend(range.map(|p| lv.v.get(p) as u32));
        n
    }

    /// Depth-first search for every id whose sub-sketch lies within Hamming
    /// distance `threshold` of `query` along the stored paths. Reduced leaves
    /// above the bottom level contribute all their ids once reached.
    ///
    /// Ids are appended to `out`; `stack` is caller-owned scratch.
    pub fn search(
        &self,
        query: &[u32],
        threshold: usize,
        out: &mut Vec<u32>,
        stack: &mut Vec<(u32, u32, u32)>,
    ) -> Result<SearchCounters> {
        if query.len() != self.depth() {
            return Err(Error::InvalidInput(format!(
                "query block has length {}, trie depth is {}",
                query.len(),
                self.depth()
            )));
        }
        let mut counters = SearchCounters { nodes_visited: 1, candidates: 0 };
        if self.internal_count(0) == 0 {
            counters.candidates = self.push_leaf(0, 0, out);
            return Ok(counters);
        }
        let sigma = self.sigma;
        stack.clear();
        stack.push((0, 0, 0));
        while let Some((level, i, dist)) = stack.pop() {
            let (level, i, dist) = (level as usize, i as usize, dist as usize);
            let lv = &self.levels[level];
            let want = query[level] as usize;
            let mut visit = |c: usize, child: Child, stack: &mut Vec<(u32, u32, u32)>| {
                let d = dist + (c != want) as usize;
                counters.nodes_visited += 1;
                match child {
                    Child::Internal(j) => stack.push((level as u32 + 1, j as u32, d as u32)),
                    Child::Leaf(j) => counters.candidates += self.push_leaf(level + 1, j, out),
                    Child::Absent => unreachable!(),
                }
            };
            if dist == threshold {
                // only the matching edge keeps the distance within bounds
                if want < sigma {
                    match Self::child_in(lv, i * sigma + want) {
                        Child::Absent => {}
                        child => visit(want, child, stack),
                    }
                }
                continue;
            }
            let start = i * sigma;
            let mut internal = lv.h_rank.rank_unchecked(&lv.h, INTERNAL, start);
            let mut leaves = lv.h_rank.rank_unchecked(&lv.h, LEAF, start);
            let trytes = lv.h.trytes();
            let mut pos = start;
            let end = start + sigma;
            while pos < end {
                if pos % 5 == 0 && pos + 5 <= end && trytes[pos / 5] == 0 {
                    pos += 5;
                    continue;
                }
                match lv.h.get_unchecked(pos) {
                    INTERNAL => {
                        visit(pos - start, Child::Internal(internal), stack);
                        internal += 1;
                    }
                    LEAF => {
                        visit(pos - start, Child::Leaf(leaves), stack);
                        leaves += 1;
                    }
                    _ => {}
                }
                pos += 1;
            }
        }
        Ok(counters)
    }

    pub fn size_in_bytes(&self) -> StatBytes {
        let mut b = StatBytes::default();
        for lv in &self.levels {
            b.h += lv.h.size_in_bits() / 8;
            b.h_rank += lv.h_rank.size_in_bits() / 8;
            b.g += lv.g.size_in_bytes();
            b.v += lv.v.size_in_bytes();
        }
        b
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_u64::<LittleEndian>(self.sigma as u64)?;
        w.write_u64::<LittleEndian>(self.levels.len() as u64)?;
        for lv in &self.levels {
            lv.h.write_to(w)?;
            lv.h_rank.write_to(w)?;
            w.write_u64::<LittleEndian>(lv.g.len() as u64)?;
            for &x in lv.g.words() {
                w.write_u64::<LittleEndian>(x)?;
            }
            lv.v.write_to(w)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let sigma = r.read_u64::<LittleEndian>()? as usize;
        if !(2..=MAX_STAT_SIGMA).contains(&sigma) {
            return Err(Error::Format(format!("bad STAT alphabet {sigma}")));
        }
        let nlevels = r.read_u64::<LittleEndian>()? as usize;
        if nlevels == 0 || nlevels > 65 {
            return Err(Error::Format(format!("bad STAT level count {nlevels}")));
        }
        let mut levels = Vec::with_capacity(nlevels);
        let mut stats = TrieStats { per_level: Vec::with_capacity(nlevels), ..Default::default() };
        for _ in 0..nlevels {
            let h = TritArray::read_from(r)?;
            if h.len() % sigma != 0 {
                return Err(Error::Format("H length is not a multiple of sigma".into()));
            }
            let h_rank = TritRank::read_from(r, &h)?;
            let glen = r.read_u64::<LittleEndian>()? as usize;
            let words = (0..glen.div_ceil(64))
                .map(|_| r.read_u64::<LittleEndian>())
                .collect::<std::io::Result<Vec<_>>>()?;
            let g = BitVector::from_words(words, glen);
            let v = IntVector::read_from(r)?;
            if v.len() != glen || (glen > 0 && !g.get(0)?) {
                return Err(Error::Format("G and V disagree".into()));
            }
            stats.per_level.push((h.len() / sigma, g.count_ones()));
            levels.push(StatLevel { h, h_rank, g, v });
        }
        stats.internal = stats.per_level.iter().map(|p| p.0).sum();
        stats.leaves = stats.per_level.iter().map(|p| p.1).sum();
        stats.nodes = stats.internal + stats.leaves;
        Ok(Self { sigma, levels, stats })
    }
}

pub fn encode_stat(trie: &Trie, sigma: usize) -> Result<StatTrie> {
    StatTrie::encode(trie, sigma)
}
