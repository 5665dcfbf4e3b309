//! `tstat`: build and query STAT indexes over trajectory datasets.
//!
//! Result ids are 1-based positions in the indexed dataset file. Query ids
//! are the ids read from the query file.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use tstat::eval::{average, ground_truth, mean_median, recall_precision};
use tstat::io::{load_trajectories, DatasetFormat};
use tstat::sketch::sigma_bits_of;
use tstat::stat::sketch_all;
use tstat::{Error, IndexParams, LshParams, QueryResult, QueryScratch, Result, Sketcher, StatIndex, Trajectory};

const BENCH_COLUMNS: &str = "K,query_id,candidates,hamming,verified,gt,recall,precision,nodes_visited,filter_us,verify_us";

#[derive(Parser)]
#[command(name = "tstat", version, about = "Succinct trie index for Fréchet range search over trajectories")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "TSTAT_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sketch a dataset and write an index file.
    Build(BuildArgs),
    /// Run range queries against an index.
    Query(QueryArgs),
    /// Time queries and score them against ground truth, one CSV row per (K, query).
    #[command(after_help = format!("CSV columns, in order:\n  {BENCH_COLUMNS}\n\
        recall/precision are empty when undefined (no true answers / no reported answers).\n\
        A summary with means, medians and the index memory breakdown goes to stderr."))]
    Bench(BenchArgs),
    /// Brute-force Fréchet ground truth for a query set.
    Groundtruth(GroundtruthArgs),
    /// Print index parameters and space breakdown.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Binary,
}

impl From<Format> for DatasetFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Tsv => DatasetFormat::Tsv,
            Format::Binary => DatasetFormat::Binary,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Mode {
    Hamming,
    Frechet,
}

#[derive(Args)]
struct DataArgs {
    /// Dataset file format.
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
}

#[derive(Args)]
struct BuildArgs {
    /// Dataset to index.
    #[arg(long)]
    input: PathBuf,
    /// Output index file.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Sketch length.
    #[arg(long = "L", default_value_t = 64)]
    len: usize,
    /// Alphabet size (power of two, at most 65536).
    #[arg(long, default_value_t = 256)]
    sigma: u64,
    /// Grid cell width.
    #[arg(long, conflicts_with = "radius", required_unless_present = "radius")]
    delta: Option<f64>,
    /// Target Fréchet radius; sets delta = 8 d R.
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Grids concatenated per sketch symbol.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Number of blocks; must divide L.
    #[arg(long = "B", default_value_t = 8)]
    blocks: usize,
    /// Node reduction threshold.
    #[arg(long, default_value_t = 8)]
    lambda: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    /// Query trajectories.
    #[arg(long)]
    input: PathBuf,
    /// Indexed dataset, required in frechet mode.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    fmt: DataArgs,
    /// Hamming threshold.
    #[arg(long = "K")]
    k: usize,
    /// Fréchet radius (frechet mode; `inf` accepted).
    #[arg(long = "R")]
    radius: Option<f64>,
    #[arg(long, value_enum, default_value = "frechet")]
    mode: Mode,
    /// Write results here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Indexed dataset.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    fmt: DataArgs,
    /// Hamming thresholds, comma separated.
    #[arg(long = "K", value_delimiter = ',', required = true)]
    k: Vec<usize>,
    #[arg(long = "R")]
    radius: f64,
    /// Precomputed ground truth from `tstat groundtruth`.
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GroundtruthArgs {
    /// Dataset searched.
    #[arg(long)]
    data: PathBuf,
    /// Query trajectories.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    fmt: DataArgs,
    #[arg(long = "R")]
    radius: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    index: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let res = match cli.cmd {
        Cmd::Build(a) => build(a),
        Cmd::Query(a) => query(a),
        Cmd::Bench(a) => bench(a),
        Cmd::Groundtruth(a) => groundtruth(a),
        Cmd::Stats(a) => stats(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

/// Prefixes I/O errors with the offending path.
fn at<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(e) => Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))),
        e => e,
    })
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(at(p, File::create(p).map_err(Error::from))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(path: &Path, fmt: &DataArgs) -> Result<Vec<Trajectory<f64>>> {
    at(path, load_trajectories(path, fmt.format.into()))
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::InvalidParam(format!("R must be non-negative, got {r}")));
    }
    Ok(())
}

fn check_queries(idx: &StatIndex, queries: &[Trajectory<f64>], k: usize) -> Result<()> {
    let len = idx.params().lsh.len;
    if k > len {
        return Err(Error::InvalidParam(format!("K = {k} exceeds sketch length L = {len}")));
    }
    if let Some(q) = queries.iter().find(|q| q.dim() != idx.dim()) {
        return Err(Error::DimensionMismatch { expected: idx.dim(), got: q.dim() });
    }
    Ok(())
}

fn check_data(idx: &StatIndex, data: &[Trajectory<f64>]) -> Result<()> {
    if data.len() != idx.len() {
        return Err(Error::InvalidInput(format!(
            "dataset has {} trajectories but the index was built over {}",
            data.len(),
            idx.len()
        )));
    }
    Ok(())
}

/// Warns when `r` is not the radius the grid width was derived from.
fn flag_radius(idx: &StatIndex, r: f64) -> Option<String> {
    let delta = idx.params().lsh.delta;
    let expect = 8.0 * idx.dim() as f64 * r;
    ((expect - delta).abs() > 1e-9 * delta).then(|| format!("R = {r} differs from the build radius (delta = {delta} = 8dR at R = {})", delta / (8.0 * idx.dim() as f64)))
}

fn build(a: BuildArgs) -> Result<()> {
    let data = load(&a.input, &a.data)?;
    let dim = data.first().map(|t| t.dim()).ok_or_else(|| Error::InvalidInput("dataset is empty".into()))?;
    let delta = match (a.delta, a.radius) {
        (Some(d), _) => d,
        (None, Some(r)) => {
            check_radius(r)?;
            8.0 * dim as f64 * r
        }
        (None, None) => unreachable!("clap requires one of --delta and --R"),
    };
    let lsh = LshParams { len: a.len, sigma_bits: sigma_bits_of(a.sigma)?, delta, k: a.k, seed: a.seed };
    let params = IndexParams::new(lsh, a.blocks, a.lambda)?;

    let t = Instant::now();
    let sketches = sketch_all(&Sketcher::new(lsh, dim)?, &data)?;
    let sketch_time = t.elapsed();
    let t = Instant::now();
    let idx = StatIndex::from_sketches(&sketches, params, dim)?;
    let stat_time = t.elapsed();
    let t = Instant::now();
    at(&a.out, idx.save(&a.out))?;
    let write_time = t.elapsed();

    let st = idx.stats();
    eprintln!("indexed {} trajectories (d = {dim}, delta = {delta})", idx.len());
    eprintln!("sketching        {:>10.3} s", sketch_time.as_secs_f64());
    eprintln!("STAT building    {:>10.3} s", stat_time.as_secs_f64());
    eprintln!("writing          {:>10.3} s", write_time.as_secs_f64());
    eprintln!("STAT bytes       {:>10}", st.stat_bytes.total());
    eprintln!("sketch bytes     {:>10}", st.sketch_bytes);
    Ok(())
}

fn format_result(out: &mut dyn Write, qid: u64, res: &QueryResult, mode: Mode) -> io::Result<()> {
    write!(out, "{qid}\t")?;
    match mode {
        Mode::Hamming => {
            for (i, id) in res.hamming.iter().enumerate() {
                write!(out, "{}{}", if i > 0 { " " } else { "" }, id + 1)?;
            }
        }
        Mode::Frechet => {
            for (i, (id, d)) in res.verified.iter().enumerate() {
                write!(out, "{}{}:{d}", if i > 0 { " " } else { "" }, id + 1)?;
            }
        }
    }
    writeln!(out)
}

fn query(a: QueryArgs) -> Result<()> {
    let idx = at(&a.index, StatIndex::load(&a.index))?;
    let queries = load(&a.input, &a.fmt)?;
    check_queries(&idx, &queries, a.k)?;
    let (data, r) = match a.mode {
        Mode::Hamming => (Vec::new(), 0.0),
        Mode::Frechet => {
            let path = a.data.as_ref().ok_or_else(|| Error::InvalidParam("frechet mode needs --data".into()))?;
            let r = a.radius.ok_or_else(|| Error::InvalidParam("frechet mode needs --R".into()))?;
            check_radius(r)?;
            let data = load(path, &a.fmt)?;
            check_data(&idx, &data)?;
            if let Some(w) = flag_radius(&idx, r) {
                eprintln!("warning: {w}");
            }
            (data, r)
        }
    };
    let results: Vec<QueryResult> = queries
        .par_iter()
        .map_init(QueryScratch::default, |scratch, q| -> Result<QueryResult> {
            let mut res = idx.query(&idx.sketch(q)?, a.k, scratch)?;
            if a.mode == Mode::Frechet {
                idx.verify_frechet(&mut res, q, &data, r)?;
            }
            Ok(res)
        })
        .collect::<Result<_>>()?;
    let mut out = output(a.out.as_deref())?;
    for (q, res) in queries.iter().zip(&results) {
        format_result(&mut out, q.id(), res, a.mode)?;
    }
    out.flush()?;
    Ok(())
}

/// Ground truth file: a `# R=<r>` header, then `query_id<TAB>ids` per query.
fn write_gt(out: &mut dyn Write, r: f64, queries: &[Trajectory<f64>], gt: &[Vec<u32>]) -> io::Result<()> {
    writeln!(out, "# R={r}")?;
    for (q, ids) in queries.iter().zip(gt) {
        write!(out, "{}\t", q.id())?;
        for (i, id) in ids.iter().enumerate() {
            write!(out, "{}{}", if i > 0 { " " } else { "" }, id + 1)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn read_gt(path: &Path, queries: &[Trajectory<f64>], n: usize) -> Result<(Option<f64>, Vec<Vec<u32>>)> {
    let mut radius = None;
    let mut gt = Vec::new();
    for (lineno, line) in BufReader::new(at(path, File::open(path).map_err(Error::from))?).lines().enumerate() {
        let line = line?;
        let err = |msg: String| Error::Parse { line: lineno + 1, msg };
        if let Some(rest) = line.strip_prefix("# R=") {
            radius = Some(rest.trim().parse::<f64>().map_err(|_| err(format!("bad radius `{rest}`")))?);
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (qid, ids) = line.split_once('\t').ok_or_else(|| err("missing tab after query id".into()))?;
        let qid: u64 = qid.trim().parse().map_err(|_| err(format!("bad query id `{qid}`")))?;
        match queries.get(gt.len()) {
            Some(q) if q.id() == qid => {}
            _ => return Err(err(format!("query id {qid} does not match the query file"))),
        }
        let mut row = Vec::new();
        for tok in ids.split_whitespace() {
            let id: usize = tok.parse().map_err(|_| err(format!("bad id `{tok}`")))?;
            if id == 0 || id > n {
                return Err(err(format!("id {id} outside 1..={n}")));
            }
            row.push((id - 1) as u32);
        }
        row.sort_unstable();
        gt.push(row);
    }
    if gt.len() != queries.len() {
        return Err(Error::InvalidInput(format!("ground truth has {} rows for {} queries", gt.len(), queries.len())));
    }
    Ok((radius, gt))
}

fn groundtruth(a: GroundtruthArgs) -> Result<()> {
    check_radius(a.radius)?;
    let data = load(&a.data, &a.fmt)?;
    let queries = load(&a.input, &a.fmt)?;
    let gt = ground_truth(&data, &queries, a.radius)?;
    let mut out = output(a.out.as_deref())?;
    write_gt(&mut out, a.radius, &queries, &gt)?;
    out.flush()?;
    let sizes: Vec<f64> = gt.iter().map(|g| g.len() as f64).collect();
    let (mean, median) = mean_median(&sizes);
    eprintln!("{} queries, mean solutions per query {mean:.3}, median {median}", queries.len());
    Ok(())
}

struct BenchRow {
    res: QueryResult,
    filter: Duration,
    verify: Duration,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

fn bench(a: BenchArgs) -> Result<()> {
    check_radius(a.radius)?;
    let idx = at(&a.index, StatIndex::load(&a.index))?;
    let queries = load(&a.input, &a.fmt)?;
    for &k in &a.k {
        check_queries(&idx, &queries, k)?;
    }
    let data = load(&a.data, &a.fmt)?;
    check_data(&idx, &data)?;
    let gt = match &a.gt {
        Some(p) => {
            let (r, gt) = read_gt(p, &queries, data.len())?;
            if let Some(r) = r.filter(|&r| r != a.radius) {
                return Err(Error::InvalidParam(format!("ground truth was computed at R = {r}, not {}", a.radius)));
            }
            gt
        }
        None => ground_truth(&data, &queries, a.radius)?,
    };
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "{BENCH_COLUMNS}")?;
    for &k in &a.k {
        let rows: Vec<BenchRow> = queries
            .par_iter()
            .map_init(QueryScratch::default, |scratch, q| -> Result<BenchRow> {
                let t = Instant::now();
                let mut res = idx.query(&idx.sketch(q)?, k, scratch)?;
                let filter = t.elapsed();
                let t = Instant::now();
                idx.verify_frechet(&mut res, q, &data, a.radius)?;
                Ok(BenchRow { res, filter, verify: t.elapsed() })
            })
            .collect::<Result<_>>()?;
        let mut scores = Vec::with_capacity(rows.len());
        for ((q, row), truth) in queries.iter().zip(&rows).zip(&gt) {
            let found: Vec<u32> = row.res.verified.iter().map(|v| v.0).collect();
            let (recall, precision) = recall_precision(&found, truth);
            scores.push((recall, precision));
            writeln!(
                out,
                "{k},{},{},{},{},{},{},{},{},{:.3},{:.3}",
                q.id(),
                row.res.candidates.len(),
                row.res.hamming.len(),
                found.len(),
                truth.len(),
                opt(recall),
                opt(precision),
                row.res.nodes_visited,
                row.filter.as_secs_f64() * 1e6,
                row.verify.as_secs_f64() * 1e6
            )?;
        }
        let avg = average(&scores);
        let total: Vec<f64> = rows.iter().map(|r| (r.filter + r.verify).as_secs_f64() * 1e6).collect();
        let (mean, median) = mean_median(&total);
        eprintln!(
            "K={k}: recall {} precision {} time/query mean {mean:.1} us median {median:.1} us",
            opt(avg.recall),
            opt(avg.precision)
        );
    }
    out.flush()?;
    if let Some(w) = flag_radius(&idx, a.radius) {
        eprintln!("warning: {w}");
    }
    let st = idx.stats();
    eprintln!("memory: STAT {} B, sketches {} B", st.stat_bytes.total(), st.sketch_bytes);
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let idx = at(&a.index, StatIndex::load(&a.index))?;
    let p = idx.params();
    let st = idx.stats();
    let mut out = io::stdout().lock();
    writeln!(out, "trajectories     {}", idx.len())?;
    writeln!(out, "dimension        {}", idx.dim())?;
    writeln!(out, "L                {}", p.lsh.len)?;
    writeln!(out, "sigma            {}", p.lsh.sigma())?;
    writeln!(out, "delta            {}", p.lsh.delta)?;
    writeln!(out, "k                {}", p.lsh.k)?;
    writeln!(out, "B                {}", p.blocks.blocks)?;
    writeln!(out, "lambda           {}", p.lambda)?;
    writeln!(out, "seed             {}", p.lsh.seed)?;
    writeln!(out, "nodes            {}", st.nodes)?;
    writeln!(out, "internal nodes   {}", st.internal)?;
    writeln!(out, "H trits          {}", st.h_trits)?;
    let b = &st.stat_bytes;
    writeln!(out, "STAT bytes       {} (H {}, rank {}, G {}, V {})", b.total(), b.h, b.h_rank, b.g, b.v)?;
    writeln!(out, "sketch bytes     {}", st.sketch_bytes)?;
    writeln!(out, "block\tnodes\tinternal\tleaves\tbytes")?;
    for (j, (s, bytes)) in st.per_block.iter().zip(&st.per_block_bytes).enumerate() {
        writeln!(out, "{j}\t{}\t{}\t{}\t{}", s.nodes, s.internal, s.leaves, bytes.total())?;
    }
    Ok(())
}
