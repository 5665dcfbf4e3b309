use crate::error::{Error, Result};

const WORDS_PER_BLOCK: usize = 8;
const BLOCK_BITS: usize = WORDS_PER_BLOCK * 64;
const SELECT_SAMPLE: usize = 512;

/// Immutable bit vector supporting `Rank_c` and `Select_c` for `c` in `{0, 1}`.
///
/// Rank uses one cumulative counter per 512-bit block plus in-block popcounts.
/// Select samples every 512th one (and zero), jumps to the sampled block and
/// scans forward.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
    block_ranks: Vec<u64>,
    samples: [Vec<u32>; 2],
}

impl BitVector {
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                words[len / 64] |= 1 << (len % 64);
            }
            len += 1;
        }
        Self::from_words(words, len)
    }

    /// Builds from raw words; bits past `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(64), 0);
        if len % 64 != 0 {
            let last = words.len() - 1;
            words[last] &= (1u64 << (len % 64)) - 1;
        }
        let mut bv = Self { words, len, block_ranks: Vec::new(), samples: [Vec::new(), Vec::new()] };
        bv.build_directories();
        bv
    }

    fn build_directories(&mut self) {
        let nblocks = self.words.len().div_ceil(WORDS_PER_BLOCK);
        let mut ranks = Vec::with_capacity(nblocks + 1);
        let mut acc = 0u64;
        for block in self.words.chunks(WORDS_PER_BLOCK) {
            ranks.push(acc);
            acc += block.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        }
        ranks.push(acc);
        self.block_ranks = ranks;

        let mut samples = [Vec::new(), Vec::new()];
        let mut seen = [0usize; 2];
        for (b, _) in self.block_ranks.iter().enumerate().take(nblocks) {
            let ones_before = self.block_ranks[b] as usize;
            let zeros_before = b * BLOCK_BITS - ones_before;
            let ones_end = self.block_ranks[b + 1] as usize;
            let zeros_end = ((b + 1) * BLOCK_BITS).min(self.len) - ones_end;
            // record, for each sampled occurrence, the block it lies in
            for (c, (before, end)) in [(zeros_before, zeros_end), (ones_before, ones_end)].into_iter().enumerate() {
                while seen[c] < end {
                    if seen[c] >= before {
                        samples[c].push(b as u32);
                    }
                    seen[c] += SELECT_SAMPLE;
                }
            }
        }
        self.samples = samples;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> Result<bool> {
        if i >= self.len {
            return Err(Error::OutOfBounds { index: i, len: self.len });
        }
        Ok((self.words[i / 64] >> (i % 64)) & 1 == 1)
    }

    pub fn count_ones(&self) -> usize {
        *self.block_ranks.last().unwrap_or(&0) as usize
    }

    fn rank1_unchecked(&self, i: usize) -> usize {
        let block = i / BLOCK_BITS;
        let mut r = self.block_ranks[block] as usize;
        let w = i / 64;
        for word in &self.words[block * WORDS_PER_BLOCK..w] {
            r += word.count_ones() as usize;
        }
        if i % 64 != 0 {
            r += (self.words[w] & ((1u64 << (i % 64)) - 1)).count_ones() as usize;
        }
        r
    }

    /// Occurrences of `c` in `[0, i)`.
    pub fn rank(&self, c: bool, i: usize) -> Result<usize> {
        if i > self.len {
            return Err(Error::OutOfBounds { index: i, len: self.len });
        }
        let ones = self.rank1_unchecked(i);
        Ok(if c { ones } else { i - ones })
    }

    /// Position of occurrence `i` (zero-based) of `c`, or `len()` when there
    /// are at most `i` occurrences.
    pub fn select(&self, c: bool, i: usize) -> usize {
        let total = if c { self.count_ones() } else { self.len - self.count_ones() };
        if i >= total {
            return self.len;
        }
        let count_in = |b: usize| -> usize {
            let ones = self.block_ranks[b] as usize;
            if c {
                ones
            } else {
                b * BLOCK_BITS - ones
            }
        };
        let samples = &self.samples[c as usize];
        let mut block = samples[i / SELECT_SAMPLE] as usize;
        while block + 1 < self.block_ranks.len() - 1 && count_in(block + 1) <= i {
            block += 1;
        }
        let mut remaining = i - count_in(block);
        let mut w = block * WORDS_PER_BLOCK;
        loop {
            let word = if c { self.words[w] } else { !self.words[w] };
            let ones = word.count_ones() as usize;
            if remaining < ones {
                return w * 64 + select_in_word(word, remaining);
            }
            remaining -= ones;
            w += 1;
        }
    }

    pub fn size_in_bytes(&self) -> usize {
        self.words.len() * 8 + self.block_ranks.len() * 8 + self.samples.iter().map(|s| s.len() * 4).sum::<usize>()
    }
}

#[inline]
fn select_in_word(mut word: u64, k: usize) -> usize {
    for _ in 0..k {
        word &= word - 1;
    }
    word.trailing_zeros() as usize
}
