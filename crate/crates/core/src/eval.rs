//! Brute-force ground truth and recall/precision bookkeeping.

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{frechet_leq, Trajectory};
use crate::scalar::Scalar;

/// For every query, the positions in `collection` within Fréchet distance `r`
/// (ascending). Costs `O(n * m^2)` per query.
pub fn ground_truth<T: Scalar>(collection: &[Trajectory<T>], queries: &[Trajectory<T>], r: T) -> Result<Vec<Vec<u32>>> {
    queries
        .par_iter()
        .map(|q| {
            let mut hits = Vec::new();
            for (i, p) in collection.iter().enumerate() {
                if frechet_leq(p, q, r)? {
                    hits.push(i as u32);
                }
            }
            Ok(hits)
        })
        .collect()
}

/// Size of the intersection of two ascending id lists.
pub fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Recall `|found ∩ truth| / |truth|` (undefined for empty truth) and
/// precision `|found ∩ truth| / |found|` (undefined for empty found).
pub fn recall_precision(found: &[u32], truth: &[u32]) -> (Option<f64>, Option<f64>) {
    let hit = intersection_size(found, truth) as f64;
    let recall = (!truth.is_empty()).then(|| hit / truth.len() as f64);
    let precision = (!found.is_empty()).then(|| hit / found.len() as f64);
    (recall, precision)
}

/// Per-query averages; undefined entries are skipped.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Averages {
    pub recall: Option<f64>,
    pub precision: Option<f64>,
}

pub fn average(per_query: &[(Option<f64>, Option<f64>)]) -> Averages {
    fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
        let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
    Averages {
        recall: mean(per_query.iter().filter_map(|p| p.0)),
        precision: mean(per_query.iter().filter_map(|p| p.1)),
    }
}

/// Mean and median of a sample.
pub fn mean_median(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let mid = v.len() / 2;
    let median = if v.len() % 2 == 0 { (v[mid - 1] + v[mid]) / 2.0 } else { v[mid] };
    (mean, median)
}
