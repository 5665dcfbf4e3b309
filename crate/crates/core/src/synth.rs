//! Synthetic trajectory collections for tests, benchmarks, and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Trajectory;

/// Shape of a clustered random-walk collection in the plane.
#[derive(Debug, Clone, Copy)]
pub struct ClusterSpec {
    pub clusters: usize,
    /// Side of the square holding cluster centers.
    pub extent: f64,
    /// Maximum per-axis offset of a member from its cluster template.
    pub spread: f64,
    /// Per-point jitter added on top of the offset.
    pub jitter: f64,
    /// Step length of the template random walk.
    pub step: f64,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for ClusterSpec {
    fn default() -> Self {
        Self { clusters: 100, extent: 10_000.0, spread: 20.0, jitter: 2.0, step: 50.0, min_len: 4, max_len: 16 }
    }
}

fn walk(rng: &mut ChaCha8Rng, spec: &ClusterSpec) -> Vec<(f64, f64)> {
    let m = rng.gen_range(spec.min_len..=spec.max_len);
    let (mut x, mut y) = (rng.gen_range(0.0..spec.extent), rng.gen_range(0.0..spec.extent));
    let mut angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (0..m)
        .map(|_| {
            let p = (x, y);
            angle += rng.gen_range(-0.5..0.5);
            x += spec.step * angle.cos();
            y += spec.step * angle.sin();
            p
        })
        .collect()
}

/// `n` two-dimensional trajectories, each a jittered copy of one of
/// `spec.clusters` random-walk templates. Ids are `0..n`.
pub fn clustered(n: usize, spec: &ClusterSpec, seed: u64) -> Vec<Trajectory<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let templates: Vec<_> = (0..spec.clusters.max(1)).map(|_| walk(&mut rng, spec)).collect();
    (0..n)
        .map(|id| {
            let tpl = &templates[rng.gen_range(0..templates.len())];
            let (ox, oy) = (rng.gen_range(-spec.spread..=spec.spread), rng.gen_range(-spec.spread..=spec.spread));
            let coords = tpl
                .iter()
                .flat_map(|&(x, y)| {
                    [
                        x + ox + rng.gen_range(-spec.jitter..=spec.jitter),
                        y + oy + rng.gen_range(-spec.jitter..=spec.jitter),
                    ]
                })
                .collect();
            Trajectory::from_flat(id as u64, 2, coords).expect("generated coordinates are finite")
        })
        .collect()
}

/// Copies of random members of `base`, each point moved by at most `noise`
/// per axis. Ids are `first_id..`.
pub fn perturbed_queries(base: &[Trajectory<f64>], count: usize, noise: f64, first_id: u64, seed: u64) -> Vec<Trajectory<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|q| {
            let src = &base[rng.gen_range(0..base.len())];
            let coords = src
                .coords()
                .iter()
                .map(|&x| if noise > 0.0 { x + rng.gen_range(-noise..=noise) } else { x })
                .collect();
            Trajectory::from_flat(first_id + q as u64, src.dim(), coords).expect("finite")
        })
        .collect()
}
