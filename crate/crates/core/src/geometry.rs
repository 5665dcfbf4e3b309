//! Trajectories and the discrete Fréchet distance.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A single `d`-dimensional coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<T>(pub Vec<T>);

impl<T: Scalar> Point<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// A trajectory: an identifier and a non-empty sequence of points sharing one
/// dimension. Coordinates are stored flat, `m * d` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    id: u64,
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    /// Builds a trajectory from flat coordinates (`x1, y1, x2, y2, ...` for `d = 2`).
    pub fn from_flat(id: u64, dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if coords.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if coords.len() % dim != 0 {
            return Err(Error::InvalidInput(format!(
                "{} coordinates is not a multiple of d = {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        Ok(Self { id, dim, coords })
    }

    pub fn from_points(id: u64, points: &[Point<T>]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyTrajectory)?;
        let dim = first.dim();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            coords.extend_from_slice(&p.0);
        }
        Self::from_flat(id, dim, coords)
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points `m`.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }
}

#[inline]
pub(crate) fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

fn check_pair<T: Scalar>(p: &Trajectory<T>, q: &Trajectory<T>) -> Result<()> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: q.dim() });
    }
    Ok(())
}

/// Discrete Fréchet distance between `p` and `q`.
///
/// Runs the `O(m1 * m2)` dynamic program over squared distances with a single
/// reused row and takes the square root once at the end. Because only `min`
/// and `max` combine cell values, the result is exactly symmetric.
pub fn frechet_distance<T: Scalar>(p: &Trajectory<T>, q: &Trajectory<T>) -> Result<T> {
    check_pair(p, q)?;
    let m2 = q.len();
    let mut row = vec![T::zero(); m2];
    for (i, pi) in p.points().enumerate() {
        // `diag` holds row[j - 1] of the previous row before it is overwritten.
        let mut diag = T::zero();
        for (j, qj) in q.points().enumerate() {
            let d = sq_dist(pi, qj);
            let prev = match (i, j) {
                (0, 0) => T::zero(),
                (0, _) => row[j - 1],
                (_, 0) => row[0],
                _ => row[j].min(row[j - 1]).min(diag),
            };
            diag = row[j];
            row[j] = d.max(prev);
        }
    }
    Ok(row[m2 - 1].sqrt())
}

/// Decides `frechet_distance(p, q) <= r`.
///
/// Boolean reachability over the coupling grid: a cell is reachable when its
/// pair lies within `r` and a predecessor is reachable. Pairs are compared on
/// squared distances; only those within a few ulps of `r^2` take a square
/// root, which keeps the answer identical to comparing the full value.
pub fn frechet_leq<T: Scalar>(p: &Trajectory<T>, q: &Trajectory<T>, r: T) -> Result<bool> {
    check_pair(p, q)?;
    if r.is_nan() || r < T::zero() {
        return Err(Error::InvalidParam("radius must be non-negative".into()));
    }
    let r2 = r * r;
    let band = T::epsilon() * T::from_f64(8.0).unwrap();
    let (lo, hi) = (r2 * (T::one() - band), r2 * (T::one() + band));
    let within = |d2: T| d2 <= lo || (d2 <= hi && d2.sqrt() <= r);
    let m2 = q.len();
    let mut row = vec![false; m2];
    for (i, pi) in p.points().enumerate() {
        let mut diag = false;
        let mut any = false;
        for (j, qj) in q.points().enumerate() {
            let prev = match (i, j) {
                (0, 0) => true,
                (0, _) => row[j - 1],
                (_, 0) => row[0],
                _ => row[j] || row[j - 1] || diag,
            };
            diag = row[j];
            row[j] = prev && within(sq_dist(pi, qj));
            any |= row[j];
        }
        if !any {
            return Ok(false);
        }
    }
    Ok(row[m2 - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(pts: &[(f64, f64)]) -> Trajectory<f64> {
        let flat = pts.iter().flat_map(|&(x, y)| [x, y]).collect();
        Trajectory::from_flat(0, 2, flat).unwrap()
    }

    /// Enumerates every traversal from (0,0) to (m1-1,m2-1) and returns the
    /// minimum over traversals of the maximum pair distance.
    fn brute_force(p: &Trajectory<f64>, q: &Trajectory<f64>) -> f64 {
        fn walk(p: &Trajectory<f64>, q: &Trajectory<f64>, i: usize, j: usize, cur: f64) -> f64 {
            let d = sq_dist(p.point(i), q.point(j)).sqrt();
            let cur = cur.max(d);
            if i + 1 == p.len() && j + 1 == q.len() {
                return cur;
            }
            let mut best = f64::INFINITY;
            for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
                if i + di < p.len() && j + dj < q.len() {
                    best = best.min(walk(p, q, i + di, j + dj, cur));
                }
            }
            best
        }
        walk(p, q, 0, 0, 0.0)
    }

    #[test]
    fn identical_curves() {
        let p = traj(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(frechet_distance(&p, &p).unwrap(), 0.0);
        assert!(frechet_leq(&p, &p, 0.0).unwrap());
    }

    #[test]
    fn single_points() {
        let p = traj(&[(0.0, 0.0)]);
        let q = traj(&[(3.0, 4.0)]);
        assert_eq!(frechet_distance(&p, &q).unwrap(), 5.0);
        assert!(!frechet_leq(&p, &q, 4.9).unwrap());
        assert!(frechet_leq(&p, &q, 5.0).unwrap());
    }

    #[test]
    fn matches_enumeration_small() {
        let p = traj(&[(0.0, 0.0), (2.0, 0.0), (4.0, 0.0)]);
        let q = traj(&[(0.0, 1.0), (4.0, 1.0)]);
        let expect = brute_force(&p, &q);
        // (2,0) must pair with (0,1) or (4,1): sqrt(5).
        assert!((expect - 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(frechet_distance(&p, &q).unwrap(), expect);
    }

    #[test]
    fn errors() {
        let p = traj(&[(0.0, 0.0)]);
        let q = Trajectory::from_flat(1, 3, vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(frechet_distance(&p, &q), Err(Error::DimensionMismatch { .. })));
        assert!(frechet_leq(&p, &p, -1.0).is_err());
        assert!(matches!(
            Trajectory::<f64>::from_flat(0, 2, vec![]),
            Err(Error::EmptyTrajectory)
        ));
        assert!(Trajectory::from_flat(0, 2, vec![0.0, f64::NAN]).is_err());
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn infinite_radius() {
        let p = traj(&[(0.0, 0.0), (1e9, 0.0)]);
        let q = traj(&[(-1e9, 5.0)]);
        assert!(frechet_leq(&p, &q, f64::INFINITY).unwrap());
    }

    #[test]
    fn works_for_f32() {
        let p = Trajectory::<f32>::from_flat(0, 1, vec![0.0, 1.0]).unwrap();
        let q = Trajectory::<f32>::from_flat(1, 1, vec![0.5]).unwrap();
        assert_eq!(frechet_distance(&p, &q).unwrap(), 0.5);
    }
}
