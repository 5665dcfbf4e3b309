//! Grid-snapping LSH sketches and bit-parallel Hamming distance.
//!
//! Each sketch position `j` owns `k` randomly shifted grids. A trajectory is
//! snapped to every grid (`floor((p + shift) / delta)` per axis), consecutive
//! duplicate cells are dropped, the `k` cell sequences are concatenated with a
//! separator and hashed with a seeded polynomial hash, and the hash is reduced
//! to the alphabet `[0, sigma)`.
//!
//! Sketches are stored in a vertical layout: bit `b` of every symbol of one
//! sketch forms a single `L`-bit word, so the Hamming distance of two sketches
//! is the popcount of the OR over planes of their XORs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::geometry::Trajectory;

/// Word width bounding the sketch length.
pub const WORD_BITS: usize = 64;

const SEPARATOR: u64 = 0x9e37_79b9_7f4a_7c15;
const POLY_MUL: u64 = 0x0000_0100_0000_01b3;

/// Sketching parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LshParams {
    /// Sketch length `L`.
    pub len: usize,
    /// `log2(sigma)`, in `[1, 32]`.
    pub sigma_bits: u32,
    /// Grid cell width.
    pub delta: f64,
    /// Grids concatenated per sketch position.
    pub k: usize,
    pub seed: u64,
}

impl LshParams {
    /// `L = 64`, `sigma = 2^8`, `k = 1`.
    pub fn with_delta(delta: f64, seed: u64) -> Self {
        Self { len: 64, sigma_bits: 8, delta, k: 1, seed }
    }

    /// `delta = 8 * d * r` with the other defaults.
    pub fn for_radius(r: f64, dim: usize, seed: u64) -> Self {
        Self::with_delta(8.0 * dim as f64 * r, seed)
    }

    /// Alphabet size; a power of two.
    pub fn sigma(&self) -> u64 {
        1u64 << self.sigma_bits
    }

    pub fn validate(&self) -> Result<()> {
        if self.len == 0 || self.len > WORD_BITS {
            return Err(Error::InvalidParam(format!(
                "sketch length must be in [1, {WORD_BITS}], got {}",
                self.len
            )));
        }
        if !(1..=32).contains(&self.sigma_bits) {
            return Err(Error::InvalidParam(format!(
                "log2(sigma) must be in [1, 32], got {}",
                self.sigma_bits
            )));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidParam(format!("delta must be positive, got {}", self.delta)));
        }
        if self.k == 0 {
            return Err(Error::InvalidParam("k must be positive".into()));
        }
        Ok(())
    }
}

/// Parses an alphabet size into `log2(sigma)`, rejecting non powers of two.
pub fn sigma_bits_of(sigma: u64) -> Result<u32> {
    if sigma < 2 || !sigma.is_power_of_two() || sigma > 1u64 << 32 {
        return Err(Error::InvalidParam(format!(
            "sigma must be a power of two in [2, 2^32], got {sigma}"
        )));
    }
    Ok(sigma.trailing_zeros())
}

/// One randomly shifted grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridHasher {
    pub shift: Vec<f64>,
    pub mix_seed: u64,
}

impl GridHasher {
    /// Snaps `traj` to this grid, dropping consecutive duplicate cells.
    /// Returns the cells flattened, `d` integers per cell.
    pub fn snap<T: Scalar>(&self, traj: &Trajectory<T>, delta: f64) -> Result<Vec<i64>> {
        let d = traj.dim();
        if d != self.shift.len() {
            return Err(Error::DimensionMismatch { expected: self.shift.len(), got: d });
        }
        let mut out: Vec<i64> = Vec::with_capacity(traj.coords().len());
        let mut cell = vec![0i64; d];
        for p in traj.points() {
            for (t, (&x, &s)) in p.iter().zip(&self.shift).enumerate() {
                let x = x.to_f64().unwrap_or(f64::NAN);
                cell[t] = ((x + s) / delta).floor() as i64;
            }
            if out.len() < d || out[out.len() - d..] != cell[..] {
                out.extend_from_slice(&cell);
            }
        }
        Ok(out)
    }
}

/// Deterministically instantiates the `L * k` grids for `params` in dimension `dim`.
pub fn make_hashers(params: &LshParams, dim: usize) -> Result<Vec<GridHasher>> {
    params.validate()?;
    if dim == 0 {
        return Err(Error::InvalidParam("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let count = params.len * params.k;
    let mut hashers = Vec::with_capacity(count);
    let mut seen = std::collections::HashSet::with_capacity(count);
    for _ in 0..count {
        let shift = (0..dim)
            .map(|_| {
                let s = rng.gen::<f64>() * params.delta;
                if s < params.delta {
                    s
                } else {
                    // rounding pushed the product onto delta
                    params.delta.next_down()
                }
            })
            .collect();
        let mut mix_seed = rng.gen::<u64>();
        while !seen.insert(mix_seed) {
            mix_seed = rng.gen::<u64>();
        }
        hashers.push(GridHasher { shift, mix_seed });
    }
    Ok(hashers)
}

/// Snaps `traj` with `hasher`; see [`GridHasher::snap`].
pub fn snap_curve<T: Scalar>(hasher: &GridHasher, traj: &Trajectory<T>, delta: f64) -> Result<Vec<i64>> {
    hasher.snap(traj, delta)
}

#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn absorb(h: u64, word: u64) -> u64 {
    h.wrapping_mul(POLY_MUL).wrapping_add(finalize(word))
}

/// A length-`L` string over `[0, sigma)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sketch(pub Vec<u32>);

impl Sketch {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u32] {
        &self.0
    }

    /// Symbol-by-symbol Hamming distance.
    pub fn hamming(&self, other: &Sketch) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

/// Sketches trajectories with a fixed set of grids.
#[derive(Debug, Clone)]
pub struct Sketcher {
    params: LshParams,
    dim: usize,
    hashers: Vec<GridHasher>,
}

impl Sketcher {
    pub fn new(params: LshParams, dim: usize) -> Result<Self> {
        let hashers = make_hashers(&params, dim)?;
        Ok(Self { params, dim, hashers })
    }

    pub fn params(&self) -> &LshParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hashers(&self) -> &[GridHasher] {
        &self.hashers
    }

    pub fn sketch<T: Scalar>(&self, traj: &Trajectory<T>) -> Result<Sketch> {
        sketch(traj, &self.hashers, &self.params)
    }
}

/// Computes the sketch of `traj`; `hashers` must come from [`make_hashers`]
/// with the same `params`.
pub fn sketch<T: Scalar>(traj: &Trajectory<T>, hashers: &[GridHasher], params: &LshParams) -> Result<Sketch> {
    if hashers.len() != params.len * params.k {
        return Err(Error::InvalidParam(format!(
            "expected {} hashers, got {}",
            params.len * params.k,
            hashers.len()
        )));
    }
    let mask = params.sigma() - 1;
    let symbols = hashers
        .chunks_exact(params.k)
        .map(|group| {
            let mut h = group[0].mix_seed;
            for (g, hasher) in group.iter().enumerate() {
                if g > 0 {
                    h = absorb(h, SEPARATOR);
                }
                for c in hasher.snap(traj, params.delta)? {
                    h = absorb(h, c as u64);
                }
            }
            Ok((finalize(h) & mask) as u32)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sketch(symbols))
}

/// Vertical (bit-plane) encoding of a sketch collection.
///
/// Word `i * planes + b` holds bit `b` of every symbol of sketch `i`; bit `j`
/// of that word belongs to position `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerticalStore {
    len: usize,
    planes: usize,
    words: Vec<u64>,
}

impl VerticalStore {
    pub fn new(len: usize, sigma_bits: u32) -> Result<Self> {
        if len == 0 || len > WORD_BITS {
            return Err(Error::InvalidParam(format!(
                "vertical layout needs 1 <= L <= {WORD_BITS}, got {len}"
            )));
        }
        if !(1..=32).contains(&sigma_bits) {
            return Err(Error::InvalidParam(format!("log2(sigma) must be in [1, 32], got {sigma_bits}")));
        }
        Ok(Self { len, planes: sigma_bits as usize, words: Vec::new() })
    }

    pub(crate) fn from_raw(len: usize, sigma_bits: u32, words: Vec<u64>) -> Result<Self> {
        let mut store = Self::new(len, sigma_bits)?;
        if words.len() % store.planes != 0 {
            return Err(Error::Format("vertical store word count is not a multiple of plane count".into()));
        }
        store.words = words;
        Ok(store)
    }

    /// Encodes one sketch into its plane words.
    pub fn encode_one(&self, s: &Sketch) -> Result<Vec<u64>> {
        if s.len() != self.len {
            return Err(Error::InvalidInput(format!("sketch length {} != {}", s.len(), self.len)));
        }
        let sigma = 1u64 << self.planes;
        let mut planes = vec![0u64; self.planes];
        for (j, &c) in s.0.iter().enumerate() {
            if c as u64 >= sigma {
                return Err(Error::InvalidInput(format!("symbol {c} outside alphabet of size {sigma}")));
            }
            for (b, plane) in planes.iter_mut().enumerate() {
                *plane |= (((c >> b) & 1) as u64) << j;
            }
        }
        Ok(planes)
    }

    pub fn push(&mut self, s: &Sketch) -> Result<()> {
        let planes = self.encode_one(s)?;
        self.words.extend_from_slice(&planes);
        Ok(())
    }

    /// Sketch count `n`.
    pub fn count(&self) -> usize {
        self.words.len() / self.planes
    }

    pub fn sketch_len(&self) -> usize {
        self.len
    }

    pub fn planes(&self) -> usize {
        self.planes
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn plane_words(&self, i: usize) -> &[u64] {
        &self.words[i * self.planes..(i + 1) * self.planes]
    }

    /// Reconstructs sketch `i`.
    pub fn decode(&self, i: usize) -> Result<Sketch> {
        if i >= self.count() {
            return Err(Error::OutOfBounds { index: i, len: self.count() });
        }
        let planes = self.plane_words(i);
        let symbols = (0..self.len)
            .map(|j| {
                planes
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (b, &w)| acc | ((((w >> j) & 1) as u32) << b))
            })
            .collect();
        Ok(Sketch(symbols))
    }

    /// Hamming distance between sketch `i` and a query in plane form.
    pub fn hamming(&self, i: usize, query: &[u64]) -> Result<u32> {
        if query.len() != self.planes {
            return Err(Error::InvalidInput(format!(
                "query has {} planes, store has {}",
                query.len(),
                self.planes
            )));
        }
        if i >= self.count() {
            return Err(Error::OutOfBounds { index: i, len: self.count() });
        }
        Ok(self.hamming_unchecked(i, query))
    }

    #[inline]
    pub(crate) fn hamming_unchecked(&self, i: usize, query: &[u64]) -> u32 {
        hamming_words(self.plane_words(i), query)
    }

    pub fn size_in_bytes(&self) -> usize {
        self.words.len() * std::mem::size_of::<u64>()
    }
}

/// OR-accumulates plane XORs and counts the set bits.
#[inline]
pub fn hamming_words(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).fold(0u64, |bits, (x, y)| bits | (x ^ y)).count_ones()
}

/// Encodes a sketch collection into the vertical layout.
pub fn encode_vertical(sketches: &[Sketch], params: &LshParams) -> Result<VerticalStore> {
    let mut store = VerticalStore::new(params.len, params.sigma_bits)?;
    store.words.reserve(sketches.len() * store.planes);
    for s in sketches {
        store.push(s)?;
    }
    Ok(store)
}

/// Hamming distance between stored sketch `i` and an encoded query.
pub fn hamming_vertical(store: &VerticalStore, i: usize, query_planes: &[u64]) -> Result<u32> {
    store.hamming(i, query_planes)
}
