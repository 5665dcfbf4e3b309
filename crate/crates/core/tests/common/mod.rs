#![allow(dead_code)]

use tstat::trie::{NodeId, Trie};
use tstat::Sketch;

/// Depth-first search over the pointer trie with the same pruning rule the
/// STAT search uses. Returns the reached ids and the number of reached nodes.
pub fn pointer_search(trie: &Trie, query: &[u32], k: usize) -> (Vec<u32>, usize) {
    let mut ids = Vec::new();
    let mut visited = 0;
    let mut stack: Vec<(NodeId, usize)> = vec![(0, 0)];
    while let Some((u, dist)) = stack.pop() {
        visited += 1;
        let node = trie.node(u);
        if node.is_leaf() {
            ids.extend_from_slice(&node.ids);
            continue;
        }
        for &(label, child) in &node.children {
            let d = dist + (label != query[node.level]) as usize;
            if d <= k {
                stack.push((child, d));
            }
        }
    }
    ids.sort_unstable();
    (ids, visited)
}

pub fn naive_hamming(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn linear_scan(sketches: &[Sketch], q: &Sketch, k: usize) -> Vec<u32> {
    sketches
        .iter()
        .enumerate()
        .filter(|(_, s)| naive_hamming(&s.0, &q.0) <= k)
        .map(|(i, _)| i as u32)
        .collect()
}
