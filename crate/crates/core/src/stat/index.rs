use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;

use super::trie::{StatBytes, StatTrie, MAX_STAT_SIGMA};
use crate::error::{Error, Result};
use crate::geometry::{frechet_distance, frechet_leq, Trajectory};
use crate::scalar::Scalar;
use crate::sketch::{LshParams, Sketch, Sketcher, VerticalStore};
use crate::trie::{BlockConfig, Trie, TrieStats};

const MAGIC: &[u8; 8] = b"TSTATIDX";
const VERSION: u8 = 1;

/// Per-block Hamming thresholds `K^1..K^B` summing to `max(0, K - B + 1)`,
/// spread round robin so that lower-index blocks take the larger values.
pub fn assign_thresholds(k: usize, blocks: usize) -> Vec<usize> {
    assert!(blocks > 0, "block count must be positive");
    let total = (k + 1).saturating_sub(blocks);
    let (base, extra) = (total / blocks, total % blocks);
    (0..blocks).map(|j| base + (j < extra) as usize).collect()
}

/// Every id whose stored sketch lies within `k` of the query planes.
pub fn linear_scan(store: &VerticalStore, query_planes: &[u64], k: usize) -> Vec<u32> {
    (0..store.count())
        .filter(|&i| store.hamming_unchecked(i, query_planes) as usize <= k)
        .map(|i| i as u32)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexParams {
    pub lsh: LshParams,
    pub blocks: BlockConfig,
    pub lambda: usize,
}

impl IndexParams {
    pub fn new(lsh: LshParams, blocks: usize, lambda: usize) -> Result<Self> {
        lsh.validate()?;
        let blocks = BlockConfig::new(lsh.len, blocks)?;
        if lsh.sigma() as usize > MAX_STAT_SIGMA {
            return Err(Error::InvalidParam(format!(
                "index alphabet must be at most {MAX_STAT_SIGMA}, got {}",
                lsh.sigma()
            )));
        }
        Ok(Self { lsh, blocks, lambda })
    }
}

/// Result of one query: `verified ⊆ hamming ⊆ candidates`, all sorted by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QueryResult {
    /// Union of per-block candidates `C`.
    pub candidates: Vec<u32>,
    /// Ids within Hamming distance `K` (`I`).
    pub hamming: Vec<u32>,
    /// Ids of `I` within Fréchet distance `R`, with their distances (`I′`).
    pub verified: Vec<(u32, f64)>,
    pub nodes_visited: usize,
    /// `|C^j|` per block, duplicates included.
    pub block_candidates: Vec<usize>,
}

/// Per-worker scratch reused across queries.
#[derive(Debug, Default)]
pub struct QueryScratch {
    marks: Vec<u32>,
    epoch: u32,
    gathered: Vec<u32>,
    stack: Vec<(u32, u32, u32)>,
}

impl QueryScratch {
    fn next_epoch(&mut self, n: usize) -> u32 {
        if self.marks.len() != n {
            self.marks = vec![0; n];
            self.epoch = 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }
}

/// Space and shape summary of an index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IndexStats {
    pub per_block: Vec<TrieStats>,
    pub per_block_bytes: Vec<StatBytes>,
    pub nodes: usize,
    pub internal: usize,
    /// Total `H` length in trits (`sigma * N_in`).
    pub h_trits: usize,
    pub stat_bytes: StatBytes,
    pub sketch_bytes: usize,
}

/// `B` STATs over the blocks of every sketch plus the vertical sketch store
/// used to verify candidates.
#[derive(Debug, Clone)]
pub struct StatIndex {
    params: IndexParams,
    dim: usize,
    sketcher: Sketcher,
    tries: Vec<StatTrie>,
    store: VerticalStore,
}

impl StatIndex {
    /// Sketches `trajectories` (position `i` becomes id `i`) and builds the index.
    pub fn build<T: Scalar>(trajectories: &[Trajectory<T>], params: IndexParams) -> Result<Self> {
        let dim = trajectories.first().map(|t| t.dim()).ok_or_else(|| Error::InvalidInput("empty collection".into()))?;
        let sketcher = Sketcher::new(params.lsh, dim)?;
        let sketches = sketch_all(&sketcher, trajectories)?;
        Self::from_sketches(&sketches, params, dim)
    }

    /// Builds from precomputed sketches. Blocks are built in parallel.
    pub fn from_sketches(sketches: &[Sketch], params: IndexParams, dim: usize) -> Result<Self> {
        if sketches.is_empty() {
            return Err(Error::InvalidInput("cannot index zero sketches".into()));
        }
        let sketcher = Sketcher::new(params.lsh, dim)?;
        let mut store = VerticalStore::new(params.lsh.len, params.lsh.sigma_bits)?;
        for s in sketches {
            store.push(s)?;
        }
        let sigma = params.lsh.sigma() as usize;
        let tries = (0..params.blocks.blocks)
            .into_par_iter()
            .map(|j| {
                let range = params.blocks.range(j);
                let subs: Vec<&[u32]> = sketches.iter().map(|s| &s.0[range.clone()]).collect();
                let trie = Trie::build(&subs)?.reduce(params.lambda);
                StatTrie::encode(&trie, sigma)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { params, dim, sketcher, tries, store })
    }

    pub fn params(&self) -> &IndexParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.store.count()
    }

    pub fn is_empty(&self) -> bool {
        self.store.count() == 0
    }

    pub fn tries(&self) -> &[StatTrie] {
        &self.tries
    }

    pub fn store(&self) -> &VerticalStore {
        &self.store
    }

    pub fn sketcher(&self) -> &Sketcher {
        &self.sketcher
    }

    pub fn sketch<T: Scalar>(&self, q: &Trajectory<T>) -> Result<Sketch> {
        self.sketcher.sketch(q)
    }

    /// Hamming-only query: candidates from every block, then verification
    /// against the stored sketches.
    pub fn query(&self, t: &Sketch, k: usize, scratch: &mut QueryScratch) -> Result<QueryResult> {
        let len = self.params.lsh.len;
        if t.len() != len {
            return Err(Error::InvalidInput(format!("query sketch length {} != {len}", t.len())));
        }
        if k > len {
            return Err(Error::InvalidParam(format!("threshold K = {k} exceeds sketch length {len}")));
        }
        let planes = self.store.encode_one(t)?;
        let thresholds = assign_thresholds(k, self.params.blocks.blocks);
        let epoch = scratch.next_epoch(self.len());
        let mut result = QueryResult { block_candidates: Vec::with_capacity(self.tries.len()), ..Default::default() };
        for (j, (trie, &kj)) in self.tries.iter().zip(&thresholds).enumerate() {
            scratch.gathered.clear();
            let counters = trie.search(&t.0[self.params.blocks.range(j)], kj, &mut scratch.gathered, &mut scratch.stack)?;
            result.nodes_visited += counters.nodes_visited;
            result.block_candidates.push(counters.candidates);
            for &id in &scratch.gathered {
                let mark = &mut scratch.marks[id as usize];
                if *mark != epoch {
                    *mark = epoch;
                    result.candidates.push(id);
                }
            }
        }
        result.candidates.sort_unstable();
        result.hamming = result
            .candidates
            .iter()
            .copied()
            .filter(|&id| self.store.hamming_unchecked(id as usize, &planes) as usize <= k)
            .collect();
        Ok(result)
    }

    /// Filters `result.hamming` by Fréchet distance to `q`, filling
    /// `result.verified`. `collection[i]` must be the trajectory of id `i`.
    pub fn verify_frechet<T: Scalar>(
        &self,
        result: &mut QueryResult,
        q: &Trajectory<T>,
        collection: &[Trajectory<T>],
        r: T,
    ) -> Result<()> {
        if collection.len() != self.len() {
            return Err(Error::InvalidInput(format!(
                "collection has {} trajectories, index has {}",
                collection.len(),
                self.len()
            )));
        }
        result.verified.clear();
        for &id in &result.hamming {
            let p = &collection[id as usize];
            if frechet_leq(p, q, r)? {
                let d = frechet_distance(p, q)?;
                result.verified.push((id, d.to_f64().unwrap_or(f64::NAN)));
            }
        }
        Ok(())
    }

    /// Full pipeline: sketch `q`, search with threshold `k`, verify within `r`.
    pub fn query_trajectory<T: Scalar>(
        &self,
        q: &Trajectory<T>,
        k: usize,
        collection: &[Trajectory<T>],
        r: T,
        scratch: &mut QueryScratch,
    ) -> Result<QueryResult> {
        let t = self.sketch(q)?;
        let mut result = self.query(&t, k, scratch)?;
        self.verify_frechet(&mut result, q, collection, r)?;
        Ok(result)
    }

    /// Runs Hamming-only queries on the rayon pool, one scratch per worker.
    pub fn query_many(&self, queries: &[Sketch], k: usize) -> Result<Vec<QueryResult>> {
        queries
            .par_iter()
            .map_init(QueryScratch::default, |scratch, t| self.query(t, k, scratch))
            .collect()
    }

    pub fn stats(&self) -> IndexStats {
        let mut s = IndexStats { sketch_bytes: self.store.size_in_bytes(), ..Default::default() };
        for trie in &self.tries {
            let st = trie.stats().clone();
            s.nodes += st.nodes;
            s.internal += st.internal;
            s.h_trits += trie.levels().iter().map(|l| l.h().len()).sum::<usize>();
            let bytes = trie.size_in_bytes();
            s.stat_bytes += bytes;
            s.per_block_bytes.push(bytes);
            s.per_block.push(st);
        }
        s
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let p = &self.params;
        w.write_all(MAGIC)?;
        w.write_u8(VERSION)?;
        w.write_u32::<LittleEndian>(p.lsh.len as u32)?;
        w.write_u32::<LittleEndian>(p.lsh.sigma_bits)?;
        w.write_f64::<LittleEndian>(p.lsh.delta)?;
        w.write_u32::<LittleEndian>(p.lsh.k as u32)?;
        w.write_u64::<LittleEndian>(p.lsh.seed)?;
        w.write_u32::<LittleEndian>(p.blocks.blocks as u32)?;
        w.write_u64::<LittleEndian>(p.lambda as u64)?;
        w.write_u64::<LittleEndian>(self.len() as u64)?;
        w.write_u32::<LittleEndian>(self.dim as u32)?;
        let words = self.store.words();
        w.write_u64::<LittleEndian>(words.len() as u64)?;
        for &x in words {
            w.write_u64::<LittleEndian>(x)?;
        }
        for trie in &self.tries {
            trie.write_to(w)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not an index file (bad magic)".into()));
        }
        let version = r.read_u8()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported index version {version}, expected {VERSION}")));
        }
        let lsh = LshParams {
            len: r.read_u32::<LittleEndian>()? as usize,
            sigma_bits: r.read_u32::<LittleEndian>()?,
            delta: r.read_f64::<LittleEndian>()?,
            k: r.read_u32::<LittleEndian>()? as usize,
            seed: r.read_u64::<LittleEndian>()?,
        };
        let blocks = r.read_u32::<LittleEndian>()? as usize;
        let lambda = r.read_u64::<LittleEndian>()? as usize;
        let params = IndexParams::new(lsh, blocks, lambda).map_err(|e| Error::Format(e.to_string()))?;
        let n = r.read_u64::<LittleEndian>()? as usize;
        let dim = r.read_u32::<LittleEndian>()? as usize;
        let nwords = r.read_u64::<LittleEndian>()? as usize;
        if nwords != n * lsh.sigma_bits as usize {
            return Err(Error::Format("sketch store size disagrees with header".into()));
        }
        let words = (0..nwords).map(|_| r.read_u64::<LittleEndian>()).collect::<std::io::Result<Vec<_>>>()?;
        let store = VerticalStore::from_raw(lsh.len, lsh.sigma_bits, words)?;
        let sketcher = Sketcher::new(lsh, dim).map_err(|e| Error::Format(e.to_string()))?;
        let tries = (0..blocks).map(|_| StatTrie::read_from(r)).collect::<Result<Vec<_>>>()?;
        if tries.iter().any(|t| t.depth() != params.blocks.block_len || t.sigma() != lsh.sigma() as usize) {
            return Err(Error::Format("trie shape disagrees with header".into()));
        }
        Ok(Self { params, dim, sketcher, tries, store })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut r)
    }
}

/// Sketches a collection in parallel, preserving order.
pub fn sketch_all<T: Scalar>(sketcher: &Sketcher, trajectories: &[Trajectory<T>]) -> Result<Vec<Sketch>> {
    trajectories.par_iter().map(|t| sketcher.sketch(t)).collect()
}
