use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

/// Unsigned integers packed at a fixed bit width.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntVector {
    width: u32,
    len: usize,
    words: Vec<u64>,
}

impl IntVector {
    /// Smallest width able to hold every value `< bound` (at least 1).
    pub fn width_for(bound: u64) -> u32 {
        (64 - bound.saturating_sub(1).leading_zeros()).max(1)
    }

    pub fn with_width(width: u32) -> Self {
        assert!((1..=64).contains(&width));
        Self { width, len: 0, words: Vec::new() }
    }

    pub fn from_slice(values: &[u32], width: u32) -> Result<Self> {
        let mut v = Self::with_width(width);
        v.words.reserve((values.len() * width as usize).div_ceil(64));
        for &x in values {
            v.push(x as u64)?;
        }
        Ok(v)
    }

    pub fn push(&mut self, x: u64) -> Result<()> {
        let w = self.width as usize;
        if w < 64 && x >> w != 0 {
            return Err(Error::InvalidInput(format!("value {x} does not fit in {w} bits")));
        }
        let pos = self.len * w;
        let (q, r) = (pos / 64, pos % 64);
        if q >= self.words.len() {
            self.words.push(0);
        }
        self.words[q] |= x << r;
        if r + w > 64 {
            self.words.push(x >> (64 - r));
        }
        self.len += 1;
        Ok(())
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        let w = self.width as usize;
        let pos = i * w;
        let (q, r) = (pos / 64, pos % 64);
        let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
        let lo = self.words[q] >> r;
        if r + w <= 64 {
            lo & mask
        } else {
            (lo | (self.words[q + 1] << (64 - r))) & mask
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn size_in_bytes(&self) -> usize {
        self.words.len() * 8
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_u32::<LittleEndian>(self.width)?;
        w.write_u64::<LittleEndian>(self.len as u64)?;
        for &x in &self.words {
            w.write_u64::<LittleEndian>(x)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let width = r.read_u32::<LittleEndian>()?;
        if !(1..=64).contains(&width) {
            return Err(Error::Format(format!("bad packed width {width}")));
        }
        let len = r.read_u64::<LittleEndian>()? as usize;
        let nwords = (len * width as usize).div_ceil(64);
        let words = (0..nwords).map(|_| r.read_u64::<LittleEndian>()).collect::<std::io::Result<_>>()?;
        Ok(Self { width, len, words })
    }
}
