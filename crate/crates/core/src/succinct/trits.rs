//! Trit arrays packed five per byte ("trytes") with two-layer Rank
//! directories.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

/// Large-block span in trits.
pub const DEFAULT_LARGE_BLOCK: usize = 65550;
/// Small-block span in trits.
pub const DEFAULT_SMALL_BLOCK: usize = 50;

/// A ternary digit.
pub type Trit = u8;

const POW3: [u32; 6] = [1, 3, 9, 27, 81, 243];

/// `PREFIX[t][r][c]`: occurrences of `c` among the first `r` trits of tryte `t`.
static PREFIX: [[[u8; 3]; 6]; 243] = build_prefix_table();

const fn build_prefix_table() -> [[[u8; 3]; 6]; 243] {
    let mut table = [[[0u8; 3]; 6]; 243];
    let mut t = 0;
    while t < 243 {
        let mut r = 0;
        while r < 5 {
            let digit = (t / POW3[r] as usize) % 3;
            let mut c = 0;
            while c < 3 {
                table[t][r + 1][c] = table[t][r][c] + (digit == c) as u8;
                c += 1;
            }
            r += 1;
        }
        t += 1;
    }
    table
}

/// Trit array stored as trytes: byte `j` holds `sum c_i * 3^i` over the five
/// trits at positions `5j .. 5j + 5`. A partial final tryte is zero-padded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TritArray {
    trytes: Vec<u8>,
    len: usize,
}

impl TritArray {
    pub fn from_trits<I: IntoIterator<Item = Trit>>(trits: I) -> Result<Self> {
        let mut trytes = Vec::new();
        let mut len = 0;
        for t in trits {
            if t > 2 {
                return Err(Error::InvalidInput(format!("trit value {t} at position {len} is not in {{0,1,2}}")));
            }
            if len % 5 == 0 {
                trytes.push(0);
            }
            *trytes.last_mut().unwrap() += t * POW3[len % 5] as u8;
            len += 1;
        }
        Ok(Self { trytes, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn trytes(&self) -> &[u8] {
        &self.trytes
    }

    #[inline]
    pub(crate) fn get_unchecked(&self, i: usize) -> Trit {
        ((self.trytes[i / 5] as u32 / POW3[i % 5]) % 3) as Trit
    }

    pub fn get(&self, i: usize) -> Result<Trit> {
        if i >= self.len {
            return Err(Error::OutOfBounds { index: i, len: self.len });
        }
        Ok(self.get_unchecked(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = Trit> + '_ {
        (0..self.len).map(|i| self.get_unchecked(i))
    }

    /// Occurrences of `c` in `[from, to)`.
    pub(crate) fn count_range(&self, c: Trit, from: usize, to: usize) -> usize {
        if from >= to {
            return 0;
        }
        let c = c as usize;
        let (first, last) = (from / 5, (to - 1) / 5);
        if first == last {
            let t = self.trytes[first] as usize;
            return (PREFIX[t][to - 5 * first][c] - PREFIX[t][from % 5][c]) as usize;
        }
        let head = self.trytes[first] as usize;
        let mut n = (PREFIX[head][5][c] - PREFIX[head][from % 5][c]) as usize;
        for &t in &self.trytes[first + 1..last] {
            n += PREFIX[t as usize][5][c] as usize;
        }
        let tail = self.trytes[last] as usize;
        n + PREFIX[tail][to - 5 * last][c] as usize
    }

    /// Tryte storage, `8 * ceil(M / 5)` bits.
    pub fn size_in_bits(&self) -> usize {
        self.trytes.len() * 8
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_u64::<LittleEndian>(self.len as u64)?;
        w.write_all(&self.trytes)?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let len = r.read_u64::<LittleEndian>()? as usize;
        let mut trytes = vec![0u8; len.div_ceil(5)];
        r.read_exact(&mut trytes)?;
        if trytes.iter().any(|&t| t > 242) {
            return Err(Error::Format("tryte value above 242".into()));
        }
        Ok(Self { trytes, len })
    }
}

/// Packs trits five per byte.
pub fn trit_pack(trits: &[Trit]) -> Result<TritArray> {
    TritArray::from_trits(trits.iter().copied())
}

pub fn trit_get(a: &TritArray, i: usize) -> Result<Trit> {
    a.get(i)
}

/// Two-layer Rank directory over a [`TritArray`].
///
/// `lb[c][j]` is `Rank_c` at the start of large block `j`; `sb[c][k]` is
/// `Rank_c` at the start of small block `k` relative to its large block. A
/// compact directory omits symbol 0 and answers `Rank_0(i)` as
/// `i - Rank_1(i) - Rank_2(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TritRank {
    large: usize,
    small: usize,
    stored: [bool; 3],
    lb: [Vec<u64>; 3],
    sb: [Vec<u16>; 3],
}

impl TritRank {
    /// Directories for all three symbols.
    pub fn new(a: &TritArray, large: usize, small: usize) -> Result<Self> {
        Self::build(a, large, small, [true; 3])
    }

    /// Directories for symbols 1 and 2 only.
    pub fn compact(a: &TritArray, large: usize, small: usize) -> Result<Self> {
        Self::build(a, large, small, [false, true, true])
    }

    fn check_blocks(large: usize, small: usize) -> Result<()> {
        if small == 0 || large == 0 || large % small != 0 {
            return Err(Error::InvalidParam(format!(
                "small block {small} must be positive and divide large block {large}"
            )));
        }
        if large - small > u16::MAX as usize {
            return Err(Error::InvalidParam(format!(
                "large block {large} too wide for 16-bit small-block counters"
            )));
        }
        Ok(())
    }

    fn build(a: &TritArray, large: usize, small: usize, stored: [bool; 3]) -> Result<Self> {
        Self::check_blocks(large, small)?;
        let nl = a.len().div_ceil(large);
        let ns = a.len().div_ceil(small);
        let mut lb: [Vec<u64>; 3] = Default::default();
        let mut sb: [Vec<u16>; 3] = Default::default();
        for c in 0..3 {
            if stored[c] {
                lb[c].reserve(nl);
                sb[c].reserve(ns);
            }
        }
        let mut total = [0u64; 3];
        let mut base = [0u64; 3];
        for k in 0..ns {
            let start = k * small;
            if start % large == 0 {
                base = total;
                for c in 0..3 {
                    if stored[c] {
                        lb[c].push(total[c]);
                    }
                }
            }
            for c in 0..3 {
                if stored[c] {
                    sb[c].push((total[c] - base[c]) as u16);
                }
            }
            let end = (start + small).min(a.len());
            for (c, t) in total.iter_mut().enumerate() {
                *t += a.count_range(c as Trit, start, end) as u64;
            }
        }
        Ok(Self { large, small, stored, lb, sb })
    }

    pub fn large_block(&self) -> usize {
        self.large
    }

    pub fn small_block(&self) -> usize {
        self.small
    }

    pub fn large_counts(&self, c: Trit) -> &[u64] {
        &self.lb[c as usize]
    }

    pub fn small_counts(&self, c: Trit) -> &[u16] {
        &self.sb[c as usize]
    }

    /// Occurrences of `c` in `a[0, i)`; `a` must be the array this directory
    /// was built over.
    pub fn rank(&self, a: &TritArray, c: Trit, i: usize) -> Result<usize> {
        if c > 2 {
            return Err(Error::InvalidInput(format!("trit value {c} is not in {{0,1,2}}")));
        }
        if i > a.len() {
            return Err(Error::OutOfBounds { index: i, len: a.len() });
        }
        Ok(self.rank_unchecked(a, c, i))
    }

    #[inline]
    pub(crate) fn rank_unchecked(&self, a: &TritArray, c: Trit, i: usize) -> usize {
        if !self.stored[c as usize] {
            return i - self.rank_unchecked(a, 1, i) - self.rank_unchecked(a, 2, i);
        }
        if i == 0 {
            return 0;
        }
        let c = c as usize;
        // i == len on a block boundary has no directory entry of its own
        let k = (i / self.small).min(self.sb[c].len() - 1);
        let start = k * self.small;
        self.lb[c][start / self.large] as usize + self.sb[c][k] as usize + a.count_range(c as Trit, start, i)
    }

    pub fn size_in_bits(&self) -> usize {
        self.lb.iter().map(|v| v.len() * 64).sum::<usize>() + self.sb.iter().map(|v| v.len() * 16).sum::<usize>()
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_u64::<LittleEndian>(self.large as u64)?;
        w.write_u64::<LittleEndian>(self.small as u64)?;
        let mask = self.stored.iter().enumerate().fold(0u8, |m, (c, &s)| m | ((s as u8) << c));
        w.write_u8(mask)?;
        for c in 0..3 {
            if !self.stored[c] {
                continue;
            }
            w.write_u64::<LittleEndian>(self.lb[c].len() as u64)?;
            for &x in &self.lb[c] {
                w.write_u64::<LittleEndian>(x)?;
            }
            w.write_u64::<LittleEndian>(self.sb[c].len() as u64)?;
            for &x in &self.sb[c] {
                w.write_u16::<LittleEndian>(x)?;
            }
        }
        Ok(())
    }

    /// Reads a directory and checks its shape against `a`.
    pub fn read_from<R: Read>(r: &mut R, a: &TritArray) -> Result<Self> {
        let large = r.read_u64::<LittleEndian>()? as usize;
        let small = r.read_u64::<LittleEndian>()? as usize;
        Self::check_blocks(large, small).map_err(|e| Error::Format(e.to_string()))?;
        let mask = r.read_u8()?;
        if mask > 7 {
            return Err(Error::Format(format!("bad rank symbol mask {mask}")));
        }
        let stored = [mask & 1 != 0, mask & 2 != 0, mask & 4 != 0];
        if !(stored[1] && stored[2]) {
            return Err(Error::Format("rank directory must store symbols 1 and 2".into()));
        }
        let mut lb: [Vec<u64>; 3] = Default::default();
        let mut sb: [Vec<u16>; 3] = Default::default();
        for c in 0..3 {
            if !stored[c] {
                continue;
            }
            let nl = r.read_u64::<LittleEndian>()? as usize;
            if nl != a.len().div_ceil(large) {
                return Err(Error::Format("large-block directory size mismatch".into()));
            }
            lb[c] = (0..nl).map(|_| r.read_u64::<LittleEndian>()).collect::<std::io::Result<_>>()?;
            let ns = r.read_u64::<LittleEndian>()? as usize;
            if ns != a.len().div_ceil(small) {
                return Err(Error::Format("small-block directory size mismatch".into()));
            }
            sb[c] = (0..ns).map(|_| r.read_u16::<LittleEndian>()).collect::<std::io::Result<_>>()?;
        }
        Ok(Self { large, small, stored, lb, sb })
    }
}

/// Builds the full (all-symbol) directory.
pub fn trit_rank_build(a: &TritArray, large: usize, small: usize) -> Result<TritRank> {
    TritRank::new(a, large, small)
}

pub fn trit_rank(a: &TritArray, dirs: &TritRank, c: Trit, i: usize) -> Result<usize> {
    dirs.rank(a, c, i)
}
