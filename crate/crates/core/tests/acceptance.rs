//! Acceptance suite. Each test checks one exit criterion and prints a
//! single PASS/FAIL line (visible with `--nocapture`).

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{naive_hamming, pointer_search};
use tstat::stat::linear_scan;
use tstat::succinct::{BitVector, TritArray, TritRank, DEFAULT_LARGE_BLOCK, DEFAULT_SMALL_BLOCK};
use tstat::synth::{clustered, perturbed_queries, ClusterSpec};
use tstat::{
    assign_thresholds, build_trie, encode_stat, encode_vertical, frechet_distance, frechet_leq, Child, IndexParams,
    LshParams, QueryScratch, Sketch, Sketcher, StatIndex, Trajectory,
};

fn report(id: &str, what: &str, ok: bool, detail: String) {
    println!("[{}] {id} {what}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} failed: {detail}");
}

/// Clustered trajectories and perturbed queries, sketched with `L = 64`,
/// `sigma = 2^8`, `delta = 8dR`.
fn sketched_collection(n: usize, queries: usize, seed: u64) -> (Vec<Sketch>, Vec<Sketch>) {
    let spec = ClusterSpec { clusters: (n / 25).max(4), ..Default::default() };
    let data = clustered(n, &spec, seed);
    let qs = perturbed_queries(&data, queries, 4.0, n as u64, seed + 1);
    let sk = Sketcher::new(LshParams::for_radius(10.0, 2, seed), 2).unwrap();
    let s: Vec<Sketch> = data.iter().map(|t| sk.sketch(t).unwrap()).collect();
    let q: Vec<Sketch> = qs.iter().map(|t| sk.sketch(t).unwrap()).collect();
    (s, q)
}

#[test]
fn c01_c02_exact_answers_and_pigeonhole_completeness() {
    let start = Instant::now();
    let (mut checks, mut mismatches, mut incomplete, mut nonempty) = (0usize, 0usize, 0usize, 0usize);
    for n in [1_000, 10_000] {
        let (sketches, queries) = sketched_collection(n, 1000, n as u64);
        // oracle distances, symbol by symbol, computed once per collection
        let dists: Vec<Vec<u8>> = queries
            .iter()
            .map(|q| sketches.iter().map(|s| naive_hamming(&s.0, &q.0) as u8).collect())
            .collect();
        let lsh = LshParams::for_radius(10.0, 2, n as u64);
        for blocks in [4, 8, 16] {
            for lambda in [0, 2, 8, 32] {
                let idx = StatIndex::from_sketches(&sketches, IndexParams::new(lsh, blocks, lambda).unwrap(), 2).unwrap();
                let mut scratch = QueryScratch::default();
                for k in (0..=14).step_by(2) {
                    for (q, d) in queries.iter().zip(&dists) {
                        let res = idx.query(q, k, &mut scratch).unwrap();
                        let truth: Vec<u32> = (0..n as u32).filter(|&i| d[i as usize] as usize <= k).collect();
                        checks += 1;
                        nonempty += !truth.is_empty() as usize;
                        if res.hamming != truth {
                            mismatches += 1;
                        }
                        let cand: BTreeSet<u32> = res.candidates.iter().copied().collect();
                        if !truth.iter().all(|i| cand.contains(i)) {
                            incomplete += 1;
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        "C1",
        "exact-answer equivalence",
        mismatches == 0 && elapsed < Duration::from_secs(120),
        format!("{checks} (n,B,K,λ,query) checks, {mismatches} mismatches, {nonempty} non-empty answers, {elapsed:.1?}"),
    );
    report("C2", "pigeonhole completeness", incomplete == 0, format!("{incomplete} of {checks} queries missed a true answer in C"));
}

#[test]
fn c03_trit_structures() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    let mut storage_ok = true;
    let mut budget_ok = true;
    for len in [0usize, 1, 49, 50, 51, 65_550, 65_551, 333_333, 1_000_000] {
        let trits: Vec<u8> = (0..len).map(|_| rng.gen_range(0..3)).collect();
        let a = TritArray::from_trits(trits.iter().copied()).unwrap();
        storage_ok &= a.size_in_bits() == 8 * len.div_ceil(5);
        let full = TritRank::new(&a, DEFAULT_LARGE_BLOCK, DEFAULT_SMALL_BLOCK).unwrap();
        let compact = TritRank::compact(&a, DEFAULT_LARGE_BLOCK, DEFAULT_SMALL_BLOCK).unwrap();
        if len >= 65_550 {
            budget_ok &= full.size_in_bits() as f64 <= 0.97 * len as f64;
            budget_ok &= (full.size_in_bits() as f64 / 3.0) <= 0.33 * len as f64;
        }
        let mut prefix = vec![[0u32; 3]; len + 1];
        for (i, &t) in trits.iter().enumerate() {
            prefix[i + 1] = prefix[i];
            prefix[i + 1][t as usize] += 1;
        }
        for _ in 0..10_000 {
            let i = rng.gen_range(0..=len);
            for c in 0..3u8 {
                let expect = prefix[i][c as usize] as usize;
                mismatches += (full.rank(&a, c, i).unwrap() != expect) as usize;
                mismatches += (compact.rank(&a, c, i).unwrap() != expect) as usize;
            }
        }
    }
    let tryte = TritArray::from_trits([1, 2, 2, 0, 1]).unwrap();

    // Two-layer decomposition with t_L = 18, t_S = 6 at i = 33: five 2s
    // before position 18, two more in [18, 30), two in [30, 33).
    let mut twos = vec![0u8; 36];
    for p in [0, 4, 7, 11, 15, 19, 26, 30, 32] {
        twos[p] = 2;
    }
    let fa = TritArray::from_trits(twos.iter().copied()).unwrap();
    let fr = TritRank::new(&fa, 18, 6).unwrap();
    let path = (fr.large_counts(2)[1], fr.small_counts(2)[5], fr.rank(&fa, 2, 33).unwrap());

    let elapsed = start.elapsed();
    let ok = mismatches == 0 && tryte.trytes() == [106] && storage_ok && budget_ok && path == (5, 2, 9)
        && elapsed < Duration::from_secs(30);
    report(
        "C3",
        "trit rank / tryte packing",
        ok,
        format!(
            "{mismatches} rank mismatches, tryte {:?}, storage exact {storage_ok}, directory budget {budget_ok}, directory path {path:?}, {elapsed:.1?}",
            tryte.trytes()
        ),
    );
}

/// Sub-sketches of the worked STAT example; ids in the assertions are 1-based.
fn example_subsketches() -> Vec<Vec<u32>> {
    vec![vec![0, 1, 3, 2], vec![0, 1, 3, 0], vec![0, 3, 1, 1], vec![2, 0, 0, 0], vec![0, 0, 1, 2], vec![0, 0, 1, 2]]
}

#[test]
fn c04_stat_golden_values() {
    let trie = build_trie(&example_subsketches()).unwrap();
    let reduced = trie.reduce(1);
    let stat = encode_stat(&reduced, 4).unwrap();
    let l1 = &stat.levels()[1];
    let h1: Vec<u8> = l1.h().iter().take(4).collect();
    let l4 = &stat.levels()[4];
    let g4: Vec<u8> = (0..l4.g().len()).map(|i| l4.g().get(i).unwrap() as u8).collect();
    let v4: Vec<u64> = l4.v().iter().map(|x| x + 1).collect();
    let rank1 = l1.h_rank().rank(l1.h(), 1, 1).unwrap();
    let rank2 = l1.h_rank().rank(l1.h(), 2, 3).unwrap();
    let leaf: Vec<u32> = stat.leaf_ids(4, 0).unwrap().iter().map(|x| x + 1).collect();
    let children = (stat.child(1, 0, 1).unwrap(), stat.child(1, 0, 3).unwrap(), stat.child(1, 0, 2).unwrap());
    let sizes = (trie.nodes().len(), reduced.nodes().len(), trie.reduce(2).nodes().len());
    let ok = h1 == [1, 1, 0, 2]
        && g4 == [1, 0, 1, 1]
        && v4 == [5, 6, 2, 1]
        && rank1 == 1
        && rank2 == 0
        && leaf == [5, 6]
        && children == (Child::Internal(1), Child::Leaf(0), Child::Absent)
        && sizes == (16, 11, 6);
    report(
        "C4",
        "STAT golden values",
        ok,
        format!("H1={h1:?} G4={g4:?} V4={v4:?} Rank1={rank1} Rank2={rank2} leaf0={leaf:?} nodes={sizes:?}"),
    );
}

fn random_traj(rng: &mut ChaCha8Rng, max_len: usize) -> Trajectory<f64> {
    let m = rng.gen_range(1..=max_len);
    Trajectory::from_flat(0, 2, (0..2 * m).map(|_| rng.gen_range(-10.0..10.0)).collect()).unwrap()
}

/// Minimum over all traversals of the maximum pair distance, by enumeration.
fn enumerate_traversals(p: &Trajectory<f64>, q: &Trajectory<f64>) -> f64 {
    fn go(p: &Trajectory<f64>, q: &Trajectory<f64>, i: usize, j: usize, worst: f64, best: &mut f64) {
        let (a, b) = (p.point(i), q.point(j));
        let worst = worst.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
        if i + 1 == p.len() && j + 1 == q.len() {
            *best = best.min(worst);
            return;
        }
        for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
            if i + di < p.len() && j + dj < q.len() {
                go(p, q, i + di, j + dj, worst, best);
            }
        }
    }
    let mut best = f64::INFINITY;
    go(p, q, 0, 0, 0.0, &mut best);
    best
}

#[test]
fn c05_frechet_dp() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_rel = 0.0f64;
    for _ in 0..500 {
        let (p, q) = (random_traj(&mut rng, 6), random_traj(&mut rng, 6));
        let (dp, brute) = (frechet_distance(&p, &q).unwrap(), enumerate_traversals(&p, &q));
        worst_rel = worst_rel.max((dp - brute).abs() / brute.max(f64::MIN_POSITIVE));
    }
    let mut disagreements = 0;
    for t in 0..10_000 {
        let (p, q) = (random_traj(&mut rng, 12), random_traj(&mut rng, 12));
        let d = frechet_distance(&p, &q).unwrap();
        // every tenth radius sits exactly on the distance
        let r = if t % 10 == 0 { d } else { rng.gen_range(0.0..2.0 * d.max(1.0)) };
        disagreements += (frechet_leq(&p, &q, r).unwrap() != (d <= r)) as usize;
    }
    let elapsed = start.elapsed();
    report(
        "C5",
        "Fréchet DP vs enumeration / decision",
        worst_rel <= 1e-9 && disagreements == 0 && elapsed < Duration::from_secs(60),
        format!("max relative error {worst_rel:e} over 500 pairs, {disagreements} decision disagreements over 10^4, {elapsed:.1?}"),
    );
}

#[test]
fn c06_vertical_hamming() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    for bits in [1u32, 8, 32] {
        let params = LshParams { len: 64, sigma_bits: bits, delta: 1.0, k: 1, seed: 0 };
        let mask = ((1u64 << bits) - 1) as u32;
        let mut sketches = Vec::with_capacity(100_000);
        let mut queries = Vec::with_capacity(100_000);
        for _ in 0..100_000 {
            let a: Vec<u32> = (0..64).map(|_| rng.gen::<u32>() & mask).collect();
            let mut b = a.clone();
            for _ in 0..rng.gen_range(0..=64) {
                b[rng.gen_range(0..64)] = rng.gen::<u32>() & mask;
            }
            sketches.push(Sketch(a));
            queries.push(Sketch(b));
        }
        let store = encode_vertical(&sketches, &params).unwrap();
        for (i, q) in queries.iter().enumerate() {
            let planes = store.encode_one(q).unwrap();
            mismatches += (store.hamming(i, &planes).unwrap() as usize != naive_hamming(&sketches[i].0, &q.0)) as usize;
        }
    }
    let elapsed = start.elapsed();
    report(
        "C6",
        "vertical Hamming",
        mismatches == 0 && elapsed < Duration::from_secs(10),
        format!("{mismatches} mismatches over 3 x 10^5 pairs, {elapsed:.1?}"),
    );
}

#[test]
fn c07_node_reduction() {
    let start = Instant::now();
    let (sketches, queries) = sketched_collection(5_000, 100, 77);
    let mut violations = Vec::new();
    for block in 0..8 {
        let subs: Vec<&[u32]> = sketches.iter().map(|s| &s.0[block * 8..block * 8 + 8]).collect();
        let trie = build_trie(&subs).unwrap();
        let lambdas = [0, 1, 2, 8, 32, 128];
        let reduced: Vec<_> = lambdas.iter().map(|&l| trie.reduce(l)).collect();
        for w in 0..lambdas.len() - 1 {
            let (a, b) = (&reduced[w], &reduced[w + 1]);
            if b.stats().internal > a.stats().internal {
                violations.push(format!("N_in grew between λ={} and λ={}", lambdas[w], lambdas[w + 1]));
            }
            for (qi, q) in queries.iter().enumerate() {
                let sub = &q.0[block * 8..block * 8 + 8];
                let k = qi % 3;
                let (ca, _) = pointer_search(a, sub, k);
                let cb: BTreeSet<u32> = pointer_search(b, sub, k).0.into_iter().collect();
                if !ca.iter().all(|i| cb.contains(i)) {
                    violations.push(format!("C not monotone at block {block}, query {qi}"));
                }
            }
        }
        for r in &reduced {
            let mut ids = Vec::new();
            r.collect_ids(0, &mut ids);
            ids.sort_unstable();
            if ids != (0..sketches.len() as u32).collect::<Vec<_>>() {
                violations.push(format!("id multiset changed in block {block}"));
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        "C7",
        "node reduction properties",
        violations.is_empty() && elapsed < Duration::from_secs(60),
        format!("{} violations {:?}, {elapsed:.1?}", violations.len(), violations.iter().take(3).collect::<Vec<_>>()),
    );
}

#[test]
fn c08_threshold_assignment() {
    let paper = assign_thresholds(3, 2);
    let mut bad = 0;
    for blocks in [2, 4, 8, 16] {
        for k in 0..=64 {
            let t = assign_thresholds(k, blocks);
            let (lo, hi) = (t.iter().min().unwrap(), t.iter().max().unwrap());
            let ok = t.len() == blocks
                && t.iter().sum::<usize>() == (k as i64 - blocks as i64 + 1).max(0) as usize
                && hi - lo <= 1
                && t.windows(2).all(|w| w[0] >= w[1]);
            bad += !ok as usize;
        }
    }
    report("C8", "threshold assignment", paper == [1, 1] && bad == 0, format!("K=3,B=2 -> {paper:?}; {bad} bad (K,B) cases"));
}

#[test]
fn c09_persistence() {
    let start = Instant::now();
    let data = clustered(3_000, &ClusterSpec { clusters: 60, ..Default::default() }, 9);
    let queries = perturbed_queries(&data, 100, 3.0, 1 << 32, 10);
    let idx = StatIndex::build(&data, IndexParams::new(LshParams::for_radius(10.0, 2, 9), 8, 8).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("index.tstat");
    idx.save(&path).unwrap();
    let loaded = StatIndex::load(&path).unwrap();
    let (mut s1, mut s2) = (QueryScratch::default(), QueryScratch::default());
    let mut differing = 0;
    for (i, q) in queries.iter().enumerate() {
        let k = 2 * (i % 8);
        let a = idx.query_trajectory(q, k, &data, 10.0, &mut s1).unwrap();
        let b = loaded.query_trajectory(q, k, &data, 10.0, &mut s2).unwrap();
        let same_bits = a.verified.iter().map(|v| (v.0, v.1.to_bits())).eq(b.verified.iter().map(|v| (v.0, v.1.to_bits())));
        differing += !(a == b && same_bits) as usize;
    }
    let elapsed = start.elapsed();
    report(
        "C9",
        "save/load round trip",
        differing == 0 && elapsed < Duration::from_secs(30),
        format!("{differing} of 100 queries differ after reload, {elapsed:.1?}"),
    );
}

#[test]
fn c10_scaling_smoke() {
    let start = Instant::now();
    let n = 100_000;
    let spec = ClusterSpec { clusters: 300, spread: 3.0, jitter: 0.5, step: 20.0, min_len: 2, max_len: 12, ..Default::default() };
    let data = clustered(n, &spec, 10);
    let queries = perturbed_queries(&data, 500, 1.0, n as u64, 11);
    let idx = StatIndex::build(&data, IndexParams::new(LshParams::for_radius(10.0, 2, 10), 8, 8).unwrap()).unwrap();
    let sketches: Vec<Sketch> = queries.iter().map(|q| idx.sketch(q).unwrap()).collect();
    let mut scratch = QueryScratch::default();
    let (mut stat_time, mut ls_time) = (Duration::ZERO, Duration::ZERO);
    let mut agree = true;
    for q in &sketches {
        let t = Instant::now();
        let res = idx.query(q, 8, &mut scratch).unwrap();
        stat_time += t.elapsed();
        let t = Instant::now();
        let planes = idx.store().encode_one(q).unwrap();
        let ls = linear_scan(idx.store(), &planes, 8);
        ls_time += t.elapsed();
        agree &= res.hamming == ls;
    }
    let st = idx.stats();
    let stat_bytes = st.stat_bytes.total();
    let budget_bits = n * 64 * 8;
    let (stat_mean, ls_mean) = (stat_time / sketches.len() as u32, ls_time / sketches.len() as u32);
    let elapsed = start.elapsed();
    report(
        "C10",
        "scaling smoke test",
        agree && stat_mean < ls_mean && stat_bytes * 8 < budget_bits && elapsed < Duration::from_secs(300),
        format!(
            "mean query STAT {stat_mean:?} vs LS {ls_mean:?}; STAT {stat_bytes} B (N_in {}) vs sketch store {} B; answers agree {agree}; {elapsed:.1?}",
            st.internal,
            budget_bits / 8
        ),
    );
}

#[test]
fn select_zero_based_on_bits() {
    // presence bits of symbol 2 in (0,1,0,2,1,1,2,0)
    let bv = BitVector::from_bits([false, false, false, true, false, false, true, false]);
    assert_eq!(bv.select(true, 1), 6);
    assert_eq!(BitVector::from_bits([false; 8]).select(true, 0), 8);
}
