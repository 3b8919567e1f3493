//! Node-indexed sequences of points in ℝ^d.
//!
//! Every discrete operator maps a sequence living on one index interval to
//! a sequence on a shifted interval. [`Series`] carries its first index so
//! that compositions are checked rather than silently misaligned.

use std::ops::{Deref, RangeInclusive};

use crate::error::{Error, Result};

/// Points `x_first, ..., x_last` in ℝ^d, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    first: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Series {
    pub fn new(first: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::LengthMismatch {
                expected: dim * (data.len() / dim).max(1),
                got: data.len(),
            });
        }
        Ok(Self { first, dim, data })
    }

    pub fn zeros(first: usize, len: usize, dim: usize) -> Self {
        assert!(len > 0 && dim > 0, "series must be non-empty");
        Self {
            first,
            dim,
            data: vec![0.0; len * dim],
        }
    }

    /// Builds a one-dimensional series from scalars.
    pub fn from_scalars(first: usize, values: &[f64]) -> Result<Self> {
        Self::new(first, 1, values.to_vec())
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn last(&self) -> usize {
        self.first + self.len() - 1
    }

    pub fn range(&self) -> RangeInclusive<usize> {
        self.first..=self.last()
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, k: usize) -> bool {
        k >= self.first && k <= self.last()
    }

    /// Point at absolute index `k`.
    ///
    /// Panics when `k` is outside [`Series::range`].
    pub fn get(&self, k: usize) -> &[f64] {
        assert!(self.contains(k), "index {k} outside {:?}", self.range());
        let off = (k - self.first) * self.dim;
        &self.data[off..off + self.dim]
    }

    pub fn get_mut(&mut self, k: usize) -> &mut [f64] {
        assert!(self.contains(k), "index {k} outside {:?}", self.range());
        let off = (k - self.first) * self.dim;
        &mut self.data[off..off + self.dim]
    }

    pub fn try_get(&self, k: usize) -> Option<&[f64]> {
        self.contains(k).then(|| self.get(k))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Iterates `(k, x_k)` pairs in index order.
    pub fn points(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        let first = self.first;
        self.data
            .chunks_exact(self.dim)
            .enumerate()
            .map(move |(i, p)| (first + i, p))
    }

    /// Copy of the sub-series on `range`, which must lie inside this one.
    pub fn restrict(&self, range: RangeInclusive<usize>) -> Result<Series> {
        if range.is_empty() || !self.contains(*range.start()) || !self.contains(*range.end()) {
            return Err(Error::RangeMismatch {
                expected: self.range(),
                got: range,
            });
        }
        let lo = (range.start() - self.first) * self.dim;
        let hi = (range.end() + 1 - self.first) * self.dim;
        Series::new(*range.start(), self.dim, self.data[lo..hi].to_vec())
    }

    /// Index reflection `k -> n - k`; the result lives on `n - last ..= n - first`.
    pub fn reflect(&self, n: usize) -> Series {
        assert!(self.last() <= n, "reflection centre below last index");
        let mut data = Vec::with_capacity(self.data.len());
        for p in self.data.chunks_exact(self.dim).rev() {
            data.extend_from_slice(p);
        }
        Series {
            first: n - self.last(),
            dim: self.dim,
            data,
        }
    }

    /// `self + factor * other` on identical index ranges.
    pub fn axpy(&self, factor: f64, other: &Series) -> Result<Series> {
        self.check_aligned(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + factor * b)
            .collect();
        Ok(Series { data, ..*self })
    }

    pub fn scaled(&self, factor: f64) -> Series {
        Series {
            data: self.data.iter().map(|x| factor * x).collect(),
            ..*self
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest componentwise `|self - other|`; ranges and dimensions must match.
    pub fn max_abs_diff(&self, other: &Series) -> Result<f64> {
        self.check_aligned(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub(crate) fn check_aligned(&self, other: &Series) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if self.range() != other.range() {
            return Err(Error::RangeMismatch {
                expected: self.range(),
                got: other.range(),
            });
        }
        Ok(())
    }
}

/// Node values `Q_0, ..., Q_N` of a discrete curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory(Series);

impl Trajectory {
    /// `data` holds `N + 1` points of dimension `dim`, row-major.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        let s = Series::new(0, dim, data)?;
        if s.len() < 2 {
            return Err(Error::TooFewSteps {
                min: 1,
                got: s.len().saturating_sub(1),
            });
        }
        Ok(Self(s))
    }

    pub fn zeros(steps: usize, dim: usize) -> Self {
        Self(Series::zeros(0, steps + 1, dim))
    }

    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(1, values.to_vec())
    }

    pub fn from_series(s: Series) -> Result<Self> {
        if s.first() != 0 {
            return Err(Error::RangeMismatch {
                expected: 0..=s.len() - 1,
                got: s.range(),
            });
        }
        Self::new(s.dim, s.data)
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_series(&self) -> &Series {
        &self.0
    }

    pub fn get_mut(&mut self, k: usize) -> &mut [f64] {
        self.0.get_mut(k)
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        self.0.as_mut_slice()
    }

    pub fn into_series(self) -> Series {
        self.0
    }

    /// Interior points `Q_1, ..., Q_{N-1}` flattened.
    pub fn interior(&self) -> &[f64] {
        let d = self.0.dim;
        &self.0.data[d..self.0.data.len() - d]
    }

    pub fn interior_mut(&mut self) -> &mut [f64] {
        let d = self.0.dim;
        let n = self.0.data.len();
        &mut self.0.data[d..n - d]
    }

    /// Adds `c` to every node.
    pub fn shifted(&self, c: &[f64]) -> Trajectory {
        assert_eq!(c.len(), self.0.dim);
        let mut out = self.clone();
        for p in out.0.data.chunks_exact_mut(self.0.dim) {
            for (x, ci) in p.iter_mut().zip(c) {
                *x += ci;
            }
        }
        out
    }
}

impl Deref for Trajectory {
    type Target = Series;

    fn deref(&self) -> &Series {
        &self.0
    }
}

impl AsRef<Series> for Trajectory {
    fn as_ref(&self) -> &Series {
        &self.0
    }
}
