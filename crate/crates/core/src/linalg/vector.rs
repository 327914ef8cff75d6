use serde::{Deserialize, Serialize};

use super::{check_finite, Complex, Grid};
use crate::{LabError, Result};

/// Finitely supported vector `sum_k entries[k] e_{offset + k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    #[serde(default)]
    grid: Grid,
    offset: i64,
    entries: Vec<Complex>,
}

impl Vec2 {
    /// Unilateral vector starting at `e_offset`, `offset >= 1`.
    pub fn new(offset: i64, entries: Vec<Complex>) -> Result<Self> {
        Self::checked(Grid::Unilateral, offset, entries)
    }

    pub fn bilateral(offset: i64, entries: Vec<Complex>) -> Result<Self> {
        Self::checked(Grid::Bilateral, offset, entries)
    }

    pub fn checked(grid: Grid, offset: i64, entries: Vec<Complex>) -> Result<Self> {
        if grid == Grid::Unilateral && offset < 1 && !entries.is_empty() {
            return Err(LabError::InvalidInput(format!(
                "unilateral vector starts at index {offset}, indices are 1-based"
            )));
        }
        for z in &entries {
            check_finite(*z, "vector entry")?;
        }
        Ok(Vec2 { grid, offset, entries })
    }

    pub(crate) fn on_grid(grid: Grid, offset: i64, entries: Vec<Complex>) -> Self {
        Vec2 { grid, offset, entries }
    }

    pub fn zero(grid: Grid) -> Self {
        Vec2 {
            grid,
            offset: 1,
            entries: Vec::new(),
        }
    }

    /// `e_j` on the unilateral grid.
    pub fn basis(j: i64) -> Self {
        Self::basis_on(Grid::Unilateral, j)
    }

    pub fn basis_on(grid: Grid, j: i64) -> Self {
        assert!(grid == Grid::Bilateral || j >= 1, "e_{j} is not on the unilateral grid");
        Vec2 {
            grid,
            offset: j,
            entries: vec![Complex::new(1.0, 0.0)],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    /// One past the last represented index.
    pub fn end(&self) -> i64 {
        self.offset + self.entries.len() as i64
    }

    pub fn get(&self, i: i64) -> Complex {
        if i >= self.offset && i < self.end() {
            self.entries[(i - self.offset) as usize]
        } else {
            Complex::new(0.0, 0.0)
        }
    }

    pub fn nonzeros(&self) -> impl Iterator<Item = (i64, Complex)> + '_ {
        let offset = self.offset;
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != Complex::new(0.0, 0.0))
            .map(move |(k, &z)| (offset + k as i64, z))
    }

    pub fn is_zero(&self) -> bool {
        self.nonzeros().next().is_none()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: Complex) -> Self {
        Vec2 {
            grid: self.grid,
            offset: self.offset,
            entries: self.entries.iter().map(|z| c * z).collect(),
        }
    }

    /// Canonical representative with exact support.
    pub fn trim(&self) -> Self {
        let idx: Vec<i64> = self.nonzeros().map(|(i, _)| i).collect();
        match (idx.first(), idx.last()) {
            (Some(&lo), Some(&hi)) => Vec2 {
                grid: self.grid,
                offset: lo,
                entries: (lo..=hi).map(|i| self.get(i)).collect(),
            },
            _ => Vec2::zero(self.grid),
        }
    }

    fn combine(&self, other: &Self, f: impl Fn(Complex, Complex) -> Complex) -> Self {
        assert_eq!(self.grid, other.grid, "combining vectors on different grids");
        let (lo, hi) = match (self.is_empty(), other.is_empty()) {
            (true, true) => return Vec2::zero(self.grid),
            (true, false) => (other.offset, other.end()),
            (false, true) => (self.offset, self.end()),
            (false, false) => (self.offset.min(other.offset), self.end().max(other.end())),
        };
        Vec2 {
            grid: self.grid,
            offset: lo,
            entries: (lo..hi).map(|i| f(self.get(i), other.get(i))).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn inner(&self, other: &Self) -> Complex {
        self.nonzeros().map(|(i, z)| z * other.get(i).conj()).sum()
    }
}
