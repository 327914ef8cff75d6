//! Complex scalars, windowed matrices and vectors over the standard basis of
//! l2, and the three ideal norms (operator, Hilbert-Schmidt, nuclear).
//!
//! Indices are 1-based on the unilateral grid (`e_1, e_2, ...`). Bilateral
//! grids index by all of `Z` and may carry offsets `<= 0`.

mod eig;
mod matrix;
mod svd;
mod vector;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use eig::eigenvalues_dense;
pub use matrix::{MatrixFile, WindowedMatrix};
pub use svd::singular_values_dense;
pub use vector::Vec2;

pub type Complex = num_complex::Complex64;

/// Basis grid of the underlying sequence space: `N = {1, 2, ...}` or `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    #[default]
    Unilateral,
    Bilateral,
}

impl Grid {
    pub fn from_flag(bilateral: bool) -> Self {
        if bilateral {
            Grid::Bilateral
        } else {
            Grid::Unilateral
        }
    }

    pub fn is_bilateral(self) -> bool {
        self == Grid::Bilateral
    }

    /// Smallest admissible index, if any.
    pub fn first_index(self) -> Option<i64> {
        match self {
            Grid::Unilateral => Some(1),
            Grid::Bilateral => None,
        }
    }

    /// Clamp a half-open index range `[lo, hi)` to the grid.
    pub(crate) fn clip(self, lo: i64, hi: i64) -> (i64, i64) {
        match self.first_index() {
            Some(first) => {
                let lo = lo.max(first);
                (lo, hi.max(lo))
            }
            None => (lo, hi.max(lo)),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::Unilateral => f.write_str("unilateral"),
            Grid::Bilateral => f.write_str("bilateral"),
        }
    }
}

/// Rectangular block of absolute indices `[row_offset, row_offset + rows) x
/// [col_offset, col_offset + cols)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub row_offset: i64,
    pub col_offset: i64,
    pub rows: usize,
    pub cols: usize,
}

impl Window {
    pub fn new(row_offset: i64, col_offset: i64, rows: usize, cols: usize) -> Self {
        Window {
            row_offset,
            col_offset,
            rows,
            cols,
        }
    }

    /// `[first, first + n)` in both directions.
    pub fn square(first: i64, n: usize) -> Self {
        Window::new(first, first, n, n)
    }

    /// Window from inclusive-exclusive index bounds.
    pub fn from_bounds(row_lo: i64, row_hi: i64, col_lo: i64, col_hi: i64) -> Self {
        Window::new(
            row_lo,
            col_lo,
            (row_hi - row_lo).max(0) as usize,
            (col_hi - col_lo).max(0) as usize,
        )
    }

    pub fn empty() -> Self {
        Window::new(1, 1, 0, 0)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn row_end(&self) -> i64 {
        self.row_offset + self.rows as i64
    }

    pub fn col_end(&self) -> i64 {
        self.col_offset + self.cols as i64
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        i >= self.row_offset && i < self.row_end() && j >= self.col_offset && j < self.col_end()
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        other.is_empty()
            || (other.row_offset >= self.row_offset
                && other.row_end() <= self.row_end()
                && other.col_offset >= self.col_offset
                && other.col_end() <= self.col_end())
    }

    /// Bounding box of both windows; empty windows do not contribute.
    pub fn hull(&self, other: &Window) -> Window {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Window::from_bounds(
            self.row_offset.min(other.row_offset),
            self.row_end().max(other.row_end()),
            self.col_offset.min(other.col_offset),
            self.col_end().max(other.col_end()),
        )
    }

    pub fn intersect(&self, other: &Window) -> Window {
        let r0 = self.row_offset.max(other.row_offset);
        let r1 = self.row_end().min(other.row_end());
        let c0 = self.col_offset.max(other.col_offset);
        let c1 = self.col_end().min(other.col_end());
        if r1 <= r0 || c1 <= c0 {
            return Window::new(r0, c0, 0, 0);
        }
        Window::from_bounds(r0, r1, c0, c1)
    }

    /// Smallest square window `[lo, hi)^2` covering both the row and the
    /// column range.
    pub fn square_hull(&self) -> Window {
        if self.is_empty() {
            return *self;
        }
        let lo = self.row_offset.min(self.col_offset);
        let hi = self.row_end().max(self.col_end());
        Window::square(lo, (hi - lo) as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Largest singular value; the norm of the compact operators.
    Operator,
    /// l2 norm of the singular values.
    HilbertSchmidt,
    /// l1 norm of the singular values (trace class).
    Nuclear,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::Operator, NormKind::HilbertSchmidt, NormKind::Nuclear];
}

/// Matrix of `x -> <x, v> u`, entry `(i, j) = u_i * conj(v_j)`.
pub fn rank_one(u: &Vec2, v: &Vec2) -> WindowedMatrix {
    assert_eq!(u.grid(), v.grid(), "rank_one: vectors on different grids");
    let window = Window::new(u.offset(), v.offset(), u.len(), v.len());
    let mut out = WindowedMatrix::zeros(u.grid(), window).expect("vector offsets are valid");
    for (i, ui) in u.nonzeros() {
        for (j, vj) in v.nonzeros() {
            out.set(i, j, ui * vj.conj());
        }
    }
    out
}

pub fn norm(a: &WindowedMatrix, kind: NormKind) -> f64 {
    match kind {
        NormKind::HilbertSchmidt => a.hs_norm_sq().sqrt(),
        NormKind::Operator => a.singular_values().first().copied().unwrap_or(0.0),
        NormKind::Nuclear => a.singular_values().iter().sum(),
    }
}

/// Hilbert-Schmidt pairing `<A, B> = tr(B^* A) = sum A_ij conj(B_ij)`.
pub fn hs_inner(a: &WindowedMatrix, b: &WindowedMatrix) -> Complex {
    let overlap = a.window().intersect(&b.window());
    let mut acc = Complex::new(0.0, 0.0);
    for i in overlap.row_offset..overlap.row_end() {
        for j in overlap.col_offset..overlap.col_end() {
            acc += a.get(i, j) * b.get(i, j).conj();
        }
    }
    acc
}

pub fn adjoint(a: &WindowedMatrix) -> WindowedMatrix {
    a.adjoint()
}

pub(crate) fn check_finite(z: Complex, what: &str) -> crate::Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(crate::LabError::InvalidInput(format!("non-finite value in {what}")))
    }
}
