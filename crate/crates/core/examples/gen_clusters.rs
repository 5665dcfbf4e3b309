//! Writes a clustered synthetic dataset and a perturbed query set as TSV.
//!
//! cargo run --release --example gen_clusters -- <n> <queries> <out_dir> [seed]

use std::path::PathBuf;

use tstat::io::{save_trajectories, DatasetFormat};
use tstat::synth::{clustered, perturbed_queries, ClusterSpec};

fn main() -> tstat::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 3 {
        eprintln!("usage: gen_clusters <n> <queries> <out_dir> [seed]");
        std::process::exit(1);
    }
    let n: usize = args[0].parse().expect("n");
    let q: usize = args[1].parse().expect("queries");
    let dir = PathBuf::from(&args[2]);
    let seed: u64 = args.get(3).map(|s| s.parse().expect("seed")).unwrap_or(1);

    let spec = ClusterSpec { clusters: (n / 300).max(1), spread: 3.0, jitter: 0.5, step: 20.0, min_len: 2, max_len: 12, ..Default::default() };
    let data = clustered(n, &spec, seed);
    // query ids start after the data ids so the two files never collide
    let queries = perturbed_queries(&data, q, 1.0, n as u64 + 1, seed + 1);
    std::fs::create_dir_all(&dir)?;
    save_trajectories(dir.join("data.tsv"), DatasetFormat::Tsv, &data)?;
    save_trajectories(dir.join("queries.tsv"), DatasetFormat::Tsv, &queries)?;
    println!("wrote {} trajectories and {} queries to {}", data.len(), queries.len(), dir.display());
    Ok(())
}
