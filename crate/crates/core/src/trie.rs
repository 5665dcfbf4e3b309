//! Pointer tries over fixed-length sub-sketches, node reduction, and
//! breadth-first layout.

use crate::error::{Error, Result};

/// How sketches of length `L` are cut into `B` equal blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockConfig {
    pub blocks: usize,
    pub block_len: usize,
}

impl BlockConfig {
    pub fn new(sketch_len: usize, blocks: usize) -> Result<Self> {
        if blocks == 0 || sketch_len == 0 || sketch_len % blocks != 0 {
            return Err(Error::InvalidParam(format!(
                "block count {blocks} must be positive and divide sketch length {sketch_len}"
            )));
        }
        Ok(Self { blocks, block_len: sketch_len / blocks })
    }

    pub fn range(&self, j: usize) -> std::ops::Range<usize> {
        j * self.block_len..(j + 1) * self.block_len
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrieNode {
    /// Children sorted by ascending edge label.
    pub children: Vec<(u32, NodeId)>,
    /// Sketch ids, ascending; non-empty exactly for leaves.
    pub ids: Vec<u32>,
    pub weight: usize,
    pub level: usize,
}

impl TrieNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Arena-allocated trie; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trie {
    nodes: Vec<TrieNode>,
    depth: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrieStats {
    pub nodes: usize,
    pub internal: usize,
    pub leaves: usize,
    /// `(internal, leaves)` per level `0..=depth`.
    pub per_level: Vec<(usize, usize)>,
}

/// Nodes of one level in breadth-first order, split by kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelLayout {
    pub internal: Vec<NodeId>,
    pub leaves: Vec<NodeId>,
}

impl Trie {
    /// Builds the trie over `subs`; sketch `i` is `subs[i]`.
    ///
    /// Sub-sketches are sorted once and the trie is emitted from the sorted
    /// runs, so no per-symbol child lookups happen during construction.
    pub fn build<S: AsRef<[u32]>>(subs: &[S]) -> Result<Self> {
        if subs.is_empty() {
            return Err(Error::InvalidInput("cannot build a trie over zero sketches".into()));
        }
        if subs.len() > u32::MAX as usize {
            return Err(Error::InvalidInput("too many sketches for 32-bit ids".into()));
        }
        let depth = subs[0].as_ref().len();
        if let Some(bad) = subs.iter().position(|s| s.as_ref().len() != depth) {
            return Err(Error::InvalidInput(format!(
                "sub-sketch {bad} has length {}, expected {depth}",
                subs[bad].as_ref().len()
            )));
        }
        let mut order: Vec<u32> = (0..subs.len() as u32).collect();
        order.sort_by(|&a, &b| subs[a as usize].as_ref().cmp(subs[b as usize].as_ref()));

        let mut trie = Trie { nodes: Vec::new(), depth };
        trie.emit(subs, &order, 0);
        Ok(trie)
    }

    fn emit<S: AsRef<[u32]>>(&mut self, subs: &[S], run: &[u32], level: usize) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(TrieNode { children: Vec::new(), ids: Vec::new(), weight: run.len(), level });
        if level == self.depth {
            // stable sort keeps equal sub-sketches in ascending id order
            self.nodes[id].ids = run.to_vec();
            return id;
        }
        let mut children = Vec::new();
        let mut start = 0;
        while start < run.len() {
            let label = subs[run[start] as usize].as_ref()[level];
            let end = start + run[start..].partition_point(|&i| subs[i as usize].as_ref()[level] == label);
            children.push((label, self.emit(subs, &run[start..end], level + 1)));
            start = end;
        }
        self.nodes[id].children = children;
        id
    }

    pub fn root(&self) -> &TrieNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &TrieNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TrieNode] {
        &self.nodes
    }

    /// Sub-sketch length (maximum level).
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Collapses every subtree whose root weighs at most `lambda` into a leaf
    /// holding the subtree's ids in ascending order.
    pub fn reduce(&self, lambda: usize) -> Trie {
        let mut out = Trie { nodes: Vec::with_capacity(self.nodes.len()), depth: self.depth };
        self.copy_reduced(0, lambda, &mut out);
        out
    }

    fn copy_reduced(&self, id: NodeId, lambda: usize, out: &mut Trie) -> NodeId {
        let node = &self.nodes[id];
        let new_id = out.nodes.len();
        out.nodes.push(TrieNode { children: Vec::new(), ids: Vec::new(), weight: node.weight, level: node.level });
        if node.is_leaf() {
            out.nodes[new_id].ids = node.ids.clone();
        } else if node.weight <= lambda {
            let mut ids = Vec::with_capacity(node.weight);
            self.collect_ids(id, &mut ids);
            ids.sort_unstable();
            out.nodes[new_id].ids = ids;
        } else {
            let children = node
                .children
                .iter()
                .map(|&(label, child)| (label, self.copy_reduced(child, lambda, out)))
                .collect();
            out.nodes[new_id].children = children;
        }
        new_id
    }

    /// Appends every id below `id` in leaf order.
    pub fn collect_ids(&self, id: NodeId, out: &mut Vec<u32>) {
        let mut stack = vec![id];
        while let Some(u) = stack.pop() {
            let node = &self.nodes[u];
            out.extend_from_slice(&node.ids);
            stack.extend(node.children.iter().rev().map(|&(_, c)| c));
        }
    }

    /// Per-level internal nodes and leaves in breadth-first order, children
    /// visited by ascending label. Levels run `0..=depth`.
    pub fn bfs_layout(&self) -> Vec<LevelLayout> {
        let mut levels = vec![LevelLayout::default(); self.depth + 1];
        let mut frontier = vec![0];
        let mut next = Vec::new();
        for layout in levels.iter_mut() {
            for &u in &frontier {
                let node = &self.nodes[u];
                if node.is_leaf() {
                    layout.leaves.push(u);
                } else {
                    layout.internal.push(u);
                    next.extend(node.children.iter().map(|&(_, c)| c));
                }
            }
            std::mem::swap(&mut frontier, &mut next);
            next.clear();
        }
        levels
    }

    pub fn stats(&self) -> TrieStats {
        let mut per_level = vec![(0, 0); self.depth + 1];
        for node in &self.nodes {
            if node.is_leaf() {
                per_level[node.level].1 += 1;
            } else {
                per_level[node.level].0 += 1;
            }
        }
        let internal = per_level.iter().map(|p| p.0).sum::<usize>();
        TrieStats { nodes: self.nodes.len(), internal, leaves: self.nodes.len() - internal, per_level }
    }
}

pub fn build_trie<S: AsRef<[u32]>>(subs: &[S]) -> Result<Trie> {
    Trie::build(subs)
}

pub fn reduce(trie: &Trie, lambda: usize) -> Trie {
    trie.reduce(lambda)
}

pub fn bfs_layout(trie: &Trie) -> Vec<LevelLayout> {
    trie.bfs_layout()
}
