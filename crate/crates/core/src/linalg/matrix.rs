use std::collections::HashSet;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{check_finite, Complex, Grid, Vec2, Window};
use crate::{LabError, Result};

/// Finite complex matrix placed at an explicit window of the infinite basis
/// grid. Entries outside the window are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedMatrix {
    grid: Grid,
    window: Window,
    // row-major, `window.rows * window.cols`
    data: Vec<Complex>,
}

const ZERO: Complex = Complex::new(0.0, 0.0);

impl WindowedMatrix {
    pub fn zeros(grid: Grid, window: Window) -> Result<Self> {
        if grid == Grid::Unilateral && !window.is_empty() && (window.row_offset < 1 || window.col_offset < 1) {
            return Err(LabError::InvalidInput(format!(
                "unilateral window starts at ({}, {}), indices are 1-based",
                window.row_offset, window.col_offset
            )));
        }
        Ok(WindowedMatrix {
            grid,
            window,
            data: vec![ZERO; window.rows * window.cols],
        })
    }

    /// The zero operator (empty window).
    pub fn zero(grid: Grid) -> Self {
        WindowedMatrix {
            grid,
            window: Window::empty(),
            data: Vec::new(),
        }
    }

    /// Dense rows placed with the top-left entry at `(row_offset, col_offset)`
    /// on the unilateral grid.
    pub fn from_rows(row_offset: i64, col_offset: i64, rows: Vec<Vec<Complex>>) -> Result<Self> {
        Self::from_rows_on(Grid::Unilateral, row_offset, col_offset, rows)
    }

    pub fn from_rows_on(grid: Grid, row_offset: i64, col_offset: i64, rows: Vec<Vec<Complex>>) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(LabError::InvalidInput("ragged rows".into()));
        }
        let window = Window::new(row_offset, col_offset, rows.len(), ncols);
        let mut out = Self::zeros(grid, window)?;
        for (k, z) in rows.into_iter().flatten().enumerate() {
            check_finite(z, "matrix entry")?;
            out.data[k] = z;
        }
        Ok(out)
    }

    /// Sparse construction; duplicate indices and entries outside the window
    /// are rejected.
    pub fn from_triplets(grid: Grid, window: Window, triplets: &[(i64, i64, Complex)]) -> Result<Self> {
        let mut out = Self::zeros(grid, window)?;
        let mut seen = HashSet::new();
        for &(i, j, z) in triplets {
            if !seen.insert((i, j)) {
                return Err(LabError::InvalidInput(format!("duplicate entry ({i}, {j})")));
            }
            if !window.contains(i, j) {
                return Err(LabError::InvalidInput(format!(
                    "entry ({i}, {j}) lies outside the window"
                )));
            }
            check_finite(z, "matrix entry")?;
            out.set(i, j, z);
        }
        Ok(out)
    }

    /// Matrix unit `E_{i,j}` on the unilateral grid. Panics for indices < 1.
    pub fn unit(i: i64, j: i64) -> Self {
        Self::unit_on(Grid::Unilateral, i, j)
    }

    pub fn unit_on(grid: Grid, i: i64, j: i64) -> Self {
        let mut m = Self::zeros(grid, Window::new(i, j, 1, 1)).expect("matrix unit index outside the grid");
        m.data[0] = Complex::new(1.0, 0.0);
        m
    }

    /// `diag(values)` starting at index `first`.
    pub fn diag(first: i64, values: &[Complex]) -> Self {
        let mut m = Self::zeros(Grid::Unilateral, Window::square(first, values.len())).expect("diag offset");
        for (k, &z) in values.iter().enumerate() {
            m.set(first + k as i64, first + k as i64, z);
        }
        m
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn rows(&self) -> usize {
        self.window.rows
    }

    pub fn cols(&self) -> usize {
        self.window.cols
    }

    pub fn row_offset(&self) -> i64 {
        self.window.row_offset
    }

    pub fn col_offset(&self) -> i64 {
        self.window.col_offset
    }

    fn slot(&self, i: i64, j: i64) -> Option<usize> {
        if self.window.contains(i, j) {
            let r = (i - self.window.row_offset) as usize;
            let c = (j - self.window.col_offset) as usize;
            Some(r * self.window.cols + c)
        } else {
            None
        }
    }

    /// Entry `<A e_j, e_i>`; zero outside the window.
    pub fn get(&self, i: i64, j: i64) -> Complex {
        self.slot(i, j).map_or(ZERO, |k| self.data[k])
    }

    /// Panics if `(i, j)` is outside the window or `z` is not finite.
    pub fn set(&mut self, i: i64, j: i64, z: Complex) {
        assert!(z.re.is_finite() && z.im.is_finite(), "non-finite entry at ({i}, {j})");
        let k = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) outside window {:?}", self.window));
        self.data[k] = z;
    }

    pub(crate) fn add_at(&mut self, i: i64, j: i64, z: Complex) {
        let k = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) outside window {:?}", self.window));
        self.data[k] += z;
    }

    /// Nonzero entries in row-major order with absolute indices.
    pub fn nonzeros(&self) -> impl Iterator<Item = (i64, i64, Complex)> + '_ {
        let w = self.window;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != ZERO)
            .map(move |(k, &z)| {
                (
                    w.row_offset + (k / w.cols) as i64,
                    w.col_offset + (k % w.cols) as i64,
                    z,
                )
            })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    /// Bounding box of the entries with nonzero modulus (no epsilon).
    pub fn support(&self) -> Window {
        let mut bounds: Option<(i64, i64, i64, i64)> = None;
        for (i, j, _) in self.nonzeros() {
            bounds = Some(match bounds {
                None => (i, i + 1, j, j + 1),
                Some((r0, r1, c0, c1)) => (r0.min(i), r1.max(i + 1), c0.min(j), c1.max(j + 1)),
            });
        }
        match bounds {
            None => Window::empty(),
            Some((r0, r1, c0, c1)) => Window::from_bounds(r0, r1, c0, c1),
        }
    }

    /// Canonical representative: window shrunk to the exact support.
    pub fn trim(&self) -> Self {
        let support = self.support();
        self.restrict_to(support)
    }

    /// Same operator on a different window; fails if a nonzero entry would be
    /// dropped.
    pub fn reshape_to(&self, window: Window) -> Result<Self> {
        if !window.contains_window(&self.support()) {
            return Err(LabError::InvalidInput(format!(
                "window {window:?} does not contain support {:?}",
                self.support()
            )));
        }
        Ok(self.restrict_to(window))
    }

    /// Entries inside `window`, everything else dropped.
    pub fn restrict_to(&self, window: Window) -> Self {
        let mut out = WindowedMatrix {
            grid: self.grid,
            window,
            data: vec![ZERO; window.rows * window.cols],
        };
        let overlap = self.window.intersect(&window);
        for i in overlap.row_offset..overlap.row_end() {
            for j in overlap.col_offset..overlap.col_end() {
                let z = self.get(i, j);
                if z != ZERO {
                    out.set(i, j, z);
                }
            }
        }
        out
    }

    /// Exact operator equality, independent of the window representation.
    pub fn same_operator(&self, other: &Self) -> bool {
        self.grid == other.grid && self.max_abs_diff(other) == 0.0
    }

    /// `max |A_ij - B_ij|` over the union of both windows.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let w = self.window.hull(&other.window);
        let mut worst = 0.0f64;
        for i in w.row_offset..w.row_end() {
            for j in w.col_offset..w.col_end() {
                worst = worst.max((self.get(i, j) - other.get(i, j)).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hs_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Singular values in decreasing order (one-sided Jacobi).
    pub fn singular_values(&self) -> Vec<f64> {
        super::singular_values_dense(self.window.rows, self.window.cols, &self.data)
    }

    /// Conjugate transpose; the window is transposed.
    pub fn adjoint(&self) -> Self {
        let w = self.window;
        let tw = Window::new(w.col_offset, w.row_offset, w.cols, w.rows);
        let mut out = WindowedMatrix {
            grid: self.grid,
            window: tw,
            data: vec![ZERO; w.rows * w.cols],
        };
        for (i, j, z) in self.nonzeros() {
            out.set(j, i, z.conj());
        }
        out
    }

    pub fn scale(&self, c: Complex) -> Self {
        WindowedMatrix {
            grid: self.grid,
            window: self.window,
            data: self.data.iter().map(|z| c * z).collect(),
        }
    }

    fn combine(&self, other: &Self, f: impl Fn(Complex, Complex) -> Complex) -> Self {
        assert_eq!(self.grid, other.grid, "combining matrices on different grids");
        let w = self.window.hull(&other.window);
        let mut out = WindowedMatrix {
            grid: self.grid,
            window: w,
            data: vec![ZERO; w.rows * w.cols],
        };
        for i in w.row_offset..w.row_end() {
            for j in w.col_offset..w.col_end() {
                let k = out.slot(i, j).expect("inside hull");
                out.data[k] = f(self.get(i, j), other.get(i, j));
            }
        }
        out
    }

    /// Column `j` as a vector over the row range of the window.
    pub fn column(&self, j: i64) -> Vec2 {
        let entries = (self.window.row_offset..self.window.row_end())
            .map(|i| self.get(i, j))
            .collect();
        Vec2::on_grid(self.grid, self.window.row_offset, entries)
    }

    /// Dense row-major copy of the window.
    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    /// Ordinary matrix product on the same grid; windows must line up only in
    /// the sense that the inner index ranges are intersected.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "multiplying matrices on different grids");
        let w = Window::new(
            self.window.row_offset,
            other.window.col_offset,
            self.window.rows,
            other.window.cols,
        );
        let mut out = WindowedMatrix {
            grid: self.grid,
            window: w,
            data: vec![ZERO; w.rows * w.cols],
        };
        for (i, l, a) in self.nonzeros() {
            if l < other.window.row_offset || l >= other.window.row_end() {
                continue;
            }
            for j in w.col_offset..w.col_end() {
                let b = other.get(l, j);
                if b != ZERO {
                    out.add_at(i, j, a * b);
                }
            }
        }
        out
    }
}

impl Add for &WindowedMatrix {
    type Output = WindowedMatrix;
    fn add(self, rhs: &WindowedMatrix) -> WindowedMatrix {
        self.combine(rhs, |a, b| a + b)
    }
}

impl Sub for &WindowedMatrix {
    type Output = WindowedMatrix;
    fn sub(self, rhs: &WindowedMatrix) -> WindowedMatrix {
        self.combine(rhs, |a, b| a - b)
    }
}

impl Neg for &WindowedMatrix {
    type Output = WindowedMatrix;
    fn neg(self) -> WindowedMatrix {
        self.scale(Complex::new(-1.0, 0.0))
    }
}

impl Mul<&WindowedMatrix> for Complex {
    type Output = WindowedMatrix;
    fn mul(self, rhs: &WindowedMatrix) -> WindowedMatrix {
        rhs.scale(self)
    }
}

/// On-disk matrix format: sparse triplets `[i, j, re, im]` with absolute
/// indices. `rows`/`cols` are optional; without them the window extends from
/// the offsets to the largest index present.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixFile {
    pub row_offset: i64,
    pub col_offset: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub bilateral: bool,
    pub entries: Vec<(i64, i64, f64, f64)>,
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<WindowedMatrix> {
        let max_i = self.entries.iter().map(|e| e.0).max();
        let max_j = self.entries.iter().map(|e| e.1).max();
        let rows = self
            .rows
            .unwrap_or_else(|| max_i.map_or(0, |m| (m - self.row_offset + 1).max(0) as usize));
        let cols = self
            .cols
            .unwrap_or_else(|| max_j.map_or(0, |m| (m - self.col_offset + 1).max(0) as usize));
        let triplets: Vec<_> = self
            .entries
            .iter()
            .map(|&(i, j, re, im)| (i, j, Complex::new(re, im)))
            .collect();
        WindowedMatrix::from_triplets(
            Grid::from_flag(self.bilateral),
            Window::new(self.row_offset, self.col_offset, rows, cols),
            &triplets,
        )
    }

    pub fn from_matrix(m: &WindowedMatrix) -> Self {
        MatrixFile {
            row_offset: m.row_offset(),
            col_offset: m.col_offset(),
            rows: Some(m.rows()),
            cols: Some(m.cols()),
            bilateral: m.grid().is_bilateral(),
            entries: m.nonzeros().map(|(i, j, z)| (i, j, z.re, z.im)).collect(),
        }
    }
}

impl Serialize for WindowedMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixFile::from_matrix(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for WindowedMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MatrixFile::deserialize(d)?
            .to_matrix()
            .map_err(serde::de::Error::custom)
    }
}
