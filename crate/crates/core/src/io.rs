//! Trajectory dataset files.
//!
//! Text (`tsv`): one record per line, `id<TAB>x1,y1 x2,y2 ...`; blank lines and
//! lines starting with `#` are skipped.
//!
//! Binary: little-endian `u32 d`, `u64 n`, then per record `u64 id`, `u32 m`,
//! and `m * d` `f64` coordinates.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::geometry::Trajectory;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Tsv,
    Binary,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(Self::Tsv),
            "binary" | "bin" => Ok(Self::Binary),
            _ => Err(Error::InvalidParam(format!("unknown dataset format `{s}` (expected tsv or binary)"))),
        }
    }
}

fn parse_line<T: Scalar>(line: &str, lineno: usize) -> Result<Trajectory<T>> {
    let err = |msg: String| Error::Parse { line: lineno, msg };
    let (id, rest) = line.split_once('\t').ok_or_else(|| err("missing tab after id".into()))?;
    let id: u64 = id.trim().parse().map_err(|_| err(format!("bad id `{id}`")))?;
    let mut dim = 0;
    let mut coords = Vec::new();
    for (k, point) in rest.split_whitespace().enumerate() {
        let before = coords.len();
        for c in point.split(',') {
            let v: f64 = c.parse().map_err(|_| err(format!("bad coordinate `{c}`")))?;
            coords.push(T::from_f64(v).ok_or_else(|| err(format!("unrepresentable coordinate `{c}`")))?);
        }
        let d = coords.len() - before;
        if k == 0 {
            dim = d;
        } else if d != dim {
            return Err(err(format!("point {k} has {d} coordinates, expected {dim}")));
        }
    }
    Trajectory::from_flat(id, dim, coords).map_err(|e| err(e.to_string()))
}

fn check_collection<T: Scalar>(trajs: &[Trajectory<T>]) -> Result<()> {
    let mut ids = HashSet::with_capacity(trajs.len());
    let dim = trajs.first().map(|t| t.dim());
    for t in trajs {
        if Some(t.dim()) != dim {
            return Err(Error::DimensionMismatch { expected: dim.unwrap_or(0), got: t.dim() });
        }
        if !ids.insert(t.id()) {
            return Err(Error::InvalidInput(format!("duplicate trajectory id {}", t.id())));
        }
    }
    Ok(())
}

pub fn read_tsv<T: Scalar, R: BufRead>(r: R) -> Result<Vec<Trajectory<T>>> {
    let mut out = Vec::new();
    let mut dim = None;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let t: Trajectory<T> = parse_line(trimmed, i + 1)?;
        match dim {
            None => dim = Some(t.dim()),
            Some(d) if d != t.dim() => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("dimension {} differs from earlier records ({d})", t.dim()),
                })
            }
            _ => {}
        }
        out.push(t);
    }
    check_collection(&out)?;
    Ok(out)
}

pub fn write_tsv<T: Scalar, W: Write>(w: &mut W, trajs: &[Trajectory<T>]) -> Result<()> {
    for t in trajs {
        write!(w, "{}\t", t.id())?;
        for (k, p) in t.points().enumerate() {
            if k > 0 {
                w.write_all(b" ")?;
            }
            for (c, x) in p.iter().enumerate() {
                if c > 0 {
                    w.write_all(b",")?;
                }
                write!(w, "{:?}", x.to_f64().unwrap_or(f64::NAN))?;
            }
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_binary<T: Scalar, R: Read>(r: &mut R) -> Result<Vec<Trajectory<T>>> {
    let dim = r.read_u32::<LittleEndian>()? as usize;
    let n = r.read_u64::<LittleEndian>()? as usize;
    let mut out = Vec::with_capacity(n.min(1 << 20));
    for rec in 0..n {
        let id = r.read_u64::<LittleEndian>()?;
        let m = r.read_u32::<LittleEndian>()? as usize;
        let mut coords = Vec::with_capacity(m * dim);
        for _ in 0..m * dim {
            let v = r.read_f64::<LittleEndian>()?;
            coords.push(T::from_f64(v).ok_or_else(|| Error::Format(format!("record {rec}: bad coordinate")))?);
        }
        out.push(Trajectory::from_flat(id, dim, coords).map_err(|e| Error::Format(format!("record {rec}: {e}")))?);
    }
    check_collection(&out)?;
    Ok(out)
}

pub fn write_binary<T: Scalar, W: Write>(w: &mut W, trajs: &[Trajectory<T>]) -> Result<()> {
    let dim = trajs.first().map_or(0, |t| t.dim());
    w.write_u32::<LittleEndian>(dim as u32)?;
    w.write_u64::<LittleEndian>(trajs.len() as u64)?;
    for t in trajs {
        if t.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: t.dim() });
        }
        w.write_u64::<LittleEndian>(t.id())?;
        w.write_u32::<LittleEndian>(t.len() as u32)?;
        for x in t.coords() {
            w.write_f64::<LittleEndian>(x.to_f64().unwrap_or(f64::NAN))?;
        }
    }
    Ok(())
}

pub fn load_trajectories<T: Scalar>(path: impl AsRef<Path>, format: DatasetFormat) -> Result<Vec<Trajectory<T>>> {
    let file = File::open(path)?;
    match format {
        DatasetFormat::Tsv => read_tsv(BufReader::new(file)),
        DatasetFormat::Binary => read_binary(&mut BufReader::new(file)),
    }
}

pub fn save_trajectories<T: Scalar>(path: impl AsRef<Path>, format: DatasetFormat, trajs: &[Trajectory<T>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        DatasetFormat::Tsv => write_tsv(&mut w, trajs)?,
        DatasetFormat::Binary => write_binary(&mut w, trajs)?,
    }
    w.flush()?;
    Ok(())
}
