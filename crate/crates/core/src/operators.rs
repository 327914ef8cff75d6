//! Symbolic bounded operators on l2(N) or l2(Z) with exact basis action.
//!
//! Every variant is banded: `<T e_j, e_i>` vanishes unless `i - j` lies in a
//! finite band, which is what makes exact superoperator orbits possible.

use serde::{Deserialize, Serialize};

use crate::linalg::{Complex, Grid, MatrixFile, Vec2, Window, WindowedMatrix};
use crate::spectral::SpectralSet;
use crate::{LabError, Result};

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// A total rule `j -> value` for diagonal entries or shift weights.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceRule {
    /// `values[k]` at index `start + k`, `tail` everywhere else.
    Finite {
        start: i64,
        values: Vec<Complex>,
        tail: Complex,
    },
    /// `pattern[(j - 1) mod len]`.
    Periodic { pattern: Vec<Complex> },
    /// `1 / j` for `j >= 1`, zero for `j <= 0`.
    Reciprocal,
}

impl SequenceRule {
    pub fn constant(value: Complex) -> Self {
        SequenceRule::Finite {
            start: 1,
            values: Vec::new(),
            tail: value,
        }
    }

    pub fn value(&self, j: i64) -> Complex {
        match self {
            SequenceRule::Finite { start, values, tail } => {
                let k = j - start;
                if k >= 0 && (k as usize) < values.len() {
                    values[k as usize]
                } else {
                    *tail
                }
            }
            SequenceRule::Periodic { pattern } => {
                let len = pattern.len() as i64;
                pattern[(j - 1).rem_euclid(len) as usize]
            }
            SequenceRule::Reciprocal => {
                if j >= 1 {
                    Complex::new(1.0 / j as f64, 0.0)
                } else {
                    ZERO
                }
            }
        }
    }

    /// Distinct values taken on the grid, when there are finitely many.
    pub fn finite_range(&self, grid: Grid) -> Option<Vec<Complex>> {
        let mut vals: Vec<Complex> = match self {
            SequenceRule::Finite { start, values, tail } => {
                // entries before index 1 are never read on the unilateral grid
                let first = grid.first_index().unwrap_or(i64::MIN);
                let mut v: Vec<Complex> = values
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| start + *k as i64 >= first)
                    .map(|(_, z)| *z)
                    .collect();
                v.push(*tail);
                v
            }
            SequenceRule::Periodic { pattern } => pattern.clone(),
            SequenceRule::Reciprocal => return None,
        };
        dedup_exact(&mut vals);
        Some(vals)
    }

    fn validate(&self) -> Result<()> {
        match self {
            SequenceRule::Periodic { pattern } if pattern.is_empty() => {
                Err(LabError::InvalidInput("periodic rule with empty pattern".into()))
            }
            SequenceRule::Finite { values, tail, .. } => {
                for z in values.iter().chain(std::iter::once(tail)) {
                    crate::linalg::check_finite(*z, "sequence rule")?;
                }
                Ok(())
            }
            SequenceRule::Periodic { pattern } => {
                for z in pattern {
                    crate::linalg::check_finite(*z, "sequence rule")?;
                }
                Ok(())
            }
            SequenceRule::Reciprocal => Ok(()),
        }
    }
}

fn dedup_exact(vals: &mut Vec<Complex>) {
    let mut out: Vec<Complex> = Vec::with_capacity(vals.len());
    for z in vals.drain(..) {
        if !out.contains(&z) {
            out.push(z);
        }
    }
    *vals = out;
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// `B e_j = e_{j-1}`, `B e_1 = 0` on the unilateral grid.
    BackwardShift {
        grid: Grid,
    },
    /// `S e_j = e_{j+1}`.
    ForwardShift {
        grid: Grid,
    },
    /// `W e_j = w_j e_{j-1}`.
    WeightedBackwardShift {
        grid: Grid,
        weights: SequenceRule,
    },
    /// `D e_j = alpha_j e_j`.
    Diagonal {
        grid: Grid,
        alphas: SequenceRule,
    },
    /// `p(B) = sum_k coeffs[k] B^k`, trailing zero coefficients removed.
    PolynomialInB {
        grid: Grid,
        coeffs: Vec<Complex>,
    },
    /// Zero outside the matrix window.
    FiniteMatrix(WindowedMatrix),
    Scaled(Complex, Box<OperatorSpec>),
    Sum(Box<OperatorSpec>, Box<OperatorSpec>),
    Adjoint(Box<OperatorSpec>),
}

/// Support bound for a multiplier: a matrix supported in rows `<= R` and
/// columns `<= C` is mapped into rows `<= R + row_delta`, columns
/// `<= C + col_delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportGrowth {
    pub row_delta: i64,
    pub col_delta: i64,
}

/// Inclusive range of `i - j` over the possibly nonzero entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Band {
    pub lo: i64,
    pub hi: i64,
}

impl Band {
    fn hull(a: Option<Band>, b: Option<Band>) -> Option<Band> {
        match (a, b) {
            (Some(a), Some(b)) => Some(Band {
                lo: a.lo.min(b.lo),
                hi: a.hi.max(b.hi),
            }),
            (x, None) | (None, x) => x,
        }
    }
}

/// Half-open index bounds; `None` means unbounded.
type Bounds = Option<(i64, i64)>;

fn bounds_hull(a: Bounds, b: Bounds, a_empty: bool, b_empty: bool) -> Bounds {
    if a_empty {
        return b;
    }
    if b_empty {
        return a;
    }
    match (a, b) {
        (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
        _ => None,
    }
}

/// Materialized matrix plus the columns whose image leaves the window.
#[derive(Debug, Clone)]
pub struct Materialized {
    pub matrix: WindowedMatrix,
    /// Columns `j` for which `T e_j` may have entries outside the row range.
    pub boundary_columns: Vec<i64>,
}

/// Closed-form spectrum, or `Unknown` when none applies.
#[derive(Debug, Clone, PartialEq)]
pub enum KnownSpectrum {
    Known(SpectralSet),
    Unknown,
}

impl OperatorSpec {
    pub fn backward_shift() -> Self {
        OperatorSpec::BackwardShift { grid: Grid::Unilateral }
    }

    pub fn bilateral_backward_shift() -> Self {
        OperatorSpec::BackwardShift { grid: Grid::Bilateral }
    }

    pub fn forward_shift() -> Self {
        OperatorSpec::ForwardShift { grid: Grid::Unilateral }
    }

    pub fn diagonal(alphas: SequenceRule) -> Self {
        OperatorSpec::Diagonal {
            grid: Grid::Unilateral,
            alphas,
        }
    }

    pub fn identity() -> Self {
        Self::diagonal(SequenceRule::constant(ONE))
    }

    pub fn weighted_backward_shift(weights: SequenceRule) -> Self {
        OperatorSpec::WeightedBackwardShift {
            grid: Grid::Unilateral,
            weights,
        }
    }

    /// `sum_k coeffs[k] B^k` on the unilateral grid.
    pub fn poly_b(coeffs: &[Complex]) -> Self {
        Self::poly_b_on(Grid::Unilateral, coeffs)
    }

    pub fn poly_b_on(grid: Grid, coeffs: &[Complex]) -> Self {
        let mut coeffs = coeffs.to_vec();
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        OperatorSpec::PolynomialInB { grid, coeffs }
    }

    pub fn finite(m: WindowedMatrix) -> Self {
        OperatorSpec::FiniteMatrix(m)
    }

    pub fn scaled(c: Complex, inner: OperatorSpec) -> Self {
        OperatorSpec::Scaled(c, Box::new(inner))
    }

    pub fn sum(left: OperatorSpec, right: OperatorSpec) -> Self {
        OperatorSpec::Sum(Box::new(left), Box::new(right))
    }

    pub fn adjoint(inner: OperatorSpec) -> Self {
        OperatorSpec::Adjoint(Box::new(inner))
    }

    /// The grid the operator acts on; composite specs must agree.
    pub fn grid(&self) -> Result<Grid> {
        match self {
            OperatorSpec::BackwardShift { grid }
            | OperatorSpec::ForwardShift { grid }
            | OperatorSpec::WeightedBackwardShift { grid, .. }
            | OperatorSpec::Diagonal { grid, .. }
            | OperatorSpec::PolynomialInB { grid, .. } => Ok(*grid),
            OperatorSpec::FiniteMatrix(m) => Ok(m.grid()),
            OperatorSpec::Scaled(_, inner) | OperatorSpec::Adjoint(inner) => inner.grid(),
            OperatorSpec::Sum(a, b) => {
                let (ga, gb) = (a.grid()?, b.grid()?);
                if ga != gb {
                    return Err(LabError::BilateralMismatch {
                        operator: ga,
                        operand: gb,
                    });
                }
                Ok(ga)
            }
        }
    }

    /// Structural validation: grids agree and all constants are finite.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        match self {
            OperatorSpec::WeightedBackwardShift { weights: r, .. } | OperatorSpec::Diagonal { alphas: r, .. } => {
                r.validate()
            }
            OperatorSpec::PolynomialInB { coeffs, .. } => {
                for z in coeffs {
                    crate::linalg::check_finite(*z, "polynomial coefficient")?;
                }
                Ok(())
            }
            OperatorSpec::Scaled(c, inner) => {
                crate::linalg::check_finite(*c, "scale factor")?;
                inner.validate()
            }
            OperatorSpec::Sum(a, b) => {
                a.validate()?;
                b.validate()
            }
            OperatorSpec::Adjoint(inner) => inner.validate(),
            _ => Ok(()),
        }
    }

    /// Range of `i - j` over possibly nonzero entries; `None` for specs that
    /// are structurally zero.
    pub fn band(&self) -> Option<Band> {
        match self {
            OperatorSpec::BackwardShift { .. } | OperatorSpec::WeightedBackwardShift { .. } => {
                Some(Band { lo: -1, hi: -1 })
            }
            OperatorSpec::ForwardShift { .. } => Some(Band { lo: 1, hi: 1 }),
            OperatorSpec::Diagonal { .. } => Some(Band { lo: 0, hi: 0 }),
            OperatorSpec::PolynomialInB { coeffs, .. } => {
                let powers: Vec<i64> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != ZERO)
                    .map(|(k, _)| k as i64)
                    .collect();
                match (powers.first(), powers.last()) {
                    (Some(&lo), Some(&hi)) => Some(Band { lo: -hi, hi: -lo }),
                    _ => None,
                }
            }
            OperatorSpec::FiniteMatrix(m) => m.nonzeros().fold(None, |acc, (i, j, _)| {
                Band::hull(acc, Some(Band { lo: i - j, hi: i - j }))
            }),
            OperatorSpec::Scaled(c, inner) => {
                if *c == ZERO {
                    None
                } else {
                    inner.band()
                }
            }
            OperatorSpec::Sum(a, b) => Band::hull(a.band(), b.band()),
            OperatorSpec::Adjoint(inner) => inner.band().map(|b| Band { lo: -b.hi, hi: -b.lo }),
        }
    }

    /// Half-open bounds on row indices of possibly nonzero entries.
    fn row_bounds(&self) -> Bounds {
        match self {
            OperatorSpec::FiniteMatrix(m) => {
                let s = m.support();
                Some((s.row_offset, s.row_end()))
            }
            OperatorSpec::Scaled(_, inner) => inner.row_bounds(),
            OperatorSpec::Adjoint(inner) => inner.col_bounds(),
            OperatorSpec::Sum(a, b) => {
                bounds_hull(a.row_bounds(), b.row_bounds(), a.band().is_none(), b.band().is_none())
            }
            _ => None,
        }
    }

    fn col_bounds(&self) -> Bounds {
        match self {
            OperatorSpec::FiniteMatrix(m) => {
                let s = m.support();
                Some((s.col_offset, s.col_end()))
            }
            OperatorSpec::Scaled(_, inner) => inner.col_bounds(),
            OperatorSpec::Adjoint(inner) => inner.row_bounds(),
            OperatorSpec::Sum(a, b) => {
                bounds_hull(a.col_bounds(), b.col_bounds(), a.band().is_none(), b.band().is_none())
            }
            _ => None,
        }
    }

    /// Exact matrix entry `<T e_j, e_i>`. Indices off the grid give zero.
    pub fn entry(&self, i: i64, j: i64) -> Complex {
        match self {
            OperatorSpec::BackwardShift { grid } => {
                if i == j - 1 && on_grid(*grid, i) && on_grid(*grid, j) {
                    ONE
                } else {
                    ZERO
                }
            }
            OperatorSpec::ForwardShift { grid } => {
                if i == j + 1 && on_grid(*grid, i) && on_grid(*grid, j) {
                    ONE
                } else {
                    ZERO
                }
            }
            OperatorSpec::WeightedBackwardShift { grid, weights } => {
                if i == j - 1 && on_grid(*grid, i) && on_grid(*grid, j) {
                    weights.value(j)
                } else {
                    ZERO
                }
            }
            OperatorSpec::Diagonal { grid, alphas } => {
                if i == j && on_grid(*grid, i) {
                    alphas.value(j)
                } else {
                    ZERO
                }
            }
            OperatorSpec::PolynomialInB { grid, coeffs } => {
                let k = j - i;
                if k >= 0 && (k as usize) < coeffs.len() && on_grid(*grid, i) && on_grid(*grid, j) {
                    coeffs[k as usize]
                } else {
                    ZERO
                }
            }
            OperatorSpec::FiniteMatrix(m) => m.get(i, j),
            OperatorSpec::Scaled(c, inner) => c * inner.entry(i, j),
            OperatorSpec::Sum(a, b) => a.entry(i, j) + b.entry(i, j),
            OperatorSpec::Adjoint(inner) => inner.entry(j, i).conj(),
        }
    }

    /// Row range `[lo, hi)` that can be hit from inputs supported in
    /// `[in_lo, in_hi)`.
    pub(crate) fn image_rows(&self, grid: Grid, in_lo: i64, in_hi: i64) -> (i64, i64) {
        let Some(band) = self.band() else {
            return (in_lo, in_lo);
        };
        if in_hi <= in_lo {
            return (in_lo, in_lo);
        }
        let (mut lo, mut hi) = grid.clip(in_lo + band.lo, in_hi + band.hi);
        if let Some((r0, r1)) = self.row_bounds() {
            lo = lo.max(r0);
            hi = hi.min(r1).max(lo);
        }
        (lo, hi)
    }

    /// Column range of `A T` for `A` supported in columns `[in_lo, in_hi)`.
    pub(crate) fn right_image_cols(&self, grid: Grid, in_lo: i64, in_hi: i64) -> (i64, i64) {
        let Some(band) = self.band() else {
            return (in_lo, in_lo);
        };
        if in_hi <= in_lo {
            return (in_lo, in_lo);
        }
        // (A T)_{i,j} = sum_l a_{i,l} T_{l,j}, with l - j in the band
        let (mut lo, mut hi) = grid.clip(in_lo - band.hi, in_hi - band.lo);
        if let Some((c0, c1)) = self.col_bounds() {
            lo = lo.max(c0);
            hi = hi.min(c1).max(lo);
        }
        (lo, hi)
    }

    /// Exact image of a finitely supported vector.
    pub fn apply(&self, x: &Vec2) -> Result<Vec2> {
        let grid = self.grid()?;
        if grid != x.grid() {
            return Err(LabError::BilateralMismatch {
                operator: grid,
                operand: x.grid(),
            });
        }
        let x = x.trim();
        if x.is_empty() {
            return Ok(Vec2::zero(grid));
        }
        let band = self.band().expect("nonzero operators have a band");
        let (lo, hi) = self.image_rows(grid, x.offset(), x.end());
        let entries = (lo..hi)
            .map(|i| {
                // T_{i,j} != 0 requires i - j in [band.lo, band.hi]
                let mut acc = ZERO;
                for j in (i - band.hi).max(x.offset())..=(i - band.lo).min(x.end() - 1) {
                    let t = self.entry(i, j);
                    let xj = x.get(j);
                    if t != ZERO && xj != ZERO {
                        acc += t * xj;
                    }
                }
                acc
            })
            .collect();
        Ok(Vec2::checked(grid, lo, entries)?.trim())
    }

    /// Matrix of the operator over `window`.
    pub fn materialize(&self, window: Window) -> Result<WindowedMatrix> {
        Ok(self.materialize_flagged(window)?.matrix)
    }

    /// Matrix over `window` together with the columns whose images are not
    /// fully captured by the window's row range.
    pub fn materialize_flagged(&self, window: Window) -> Result<Materialized> {
        let grid = self.grid()?;
        let mut matrix = WindowedMatrix::zeros(grid, window)?;
        let mut boundary_columns = Vec::new();
        let band = self.band();
        for j in window.col_offset..window.col_end() {
            if let Some(band) = band {
                for i in (j + band.lo).max(window.row_offset)..=(j + band.hi).min(window.row_end() - 1) {
                    let t = self.entry(i, j);
                    if t != ZERO {
                        matrix.set(i, j, t);
                    }
                }
            }
            let (lo, hi) = self.image_rows(grid, j, j + 1);
            let escapes = hi > lo && (lo < window.row_offset || hi > window.row_end());
            if escapes {
                // only flag when an entry actually falls outside
                let outside = (lo..hi)
                    .filter(|&i| i < window.row_offset || i >= window.row_end())
                    .any(|i| self.entry(i, j) != ZERO);
                if outside {
                    boundary_columns.push(j);
                }
            }
        }
        Ok(Materialized {
            matrix,
            boundary_columns,
        })
    }

    /// Support growth of `(L_T, R_T)`.
    pub fn growth(&self) -> Result<(SupportGrowth, SupportGrowth)> {
        self.validate()?;
        Ok(match self.band() {
            None => (
                SupportGrowth {
                    row_delta: 0,
                    col_delta: 0,
                },
                SupportGrowth {
                    row_delta: 0,
                    col_delta: 0,
                },
            ),
            Some(b) => (
                SupportGrowth {
                    row_delta: b.hi,
                    col_delta: 0,
                },
                SupportGrowth {
                    row_delta: 0,
                    col_delta: -b.lo,
                },
            ),
        })
    }

    /// `Some(lambda)` when the operator is `lambda * I` on the whole grid.
    pub fn scalar_identity(&self) -> Option<Complex> {
        match self {
            OperatorSpec::Diagonal { grid, alphas } => match alphas.finite_range(*grid)?.as_slice() {
                [lambda] => Some(*lambda),
                _ => None,
            },
            OperatorSpec::PolynomialInB { coeffs, .. } => match coeffs.as_slice() {
                [] => Some(ZERO),
                [c0] => Some(*c0),
                _ => None,
            },
            OperatorSpec::FiniteMatrix(m) if m.is_zero() => Some(ZERO),
            OperatorSpec::WeightedBackwardShift { grid, weights } => match weights.finite_range(*grid)?.as_slice() {
                [w] if *w == ZERO => Some(ZERO),
                _ => None,
            },
            OperatorSpec::Scaled(c, inner) => {
                if *c == ZERO {
                    Some(ZERO)
                } else {
                    inner.scalar_identity().map(|l| c * l)
                }
            }
            OperatorSpec::Sum(a, b) => Some(a.scalar_identity()? + b.scalar_identity()?),
            OperatorSpec::Adjoint(inner) => inner.scalar_identity().map(|l| l.conj()),
            _ => None,
        }
    }

    /// The spec with scalar-identity summands removed: `Delta_{lambda I + X}
    /// = Delta_X`, so commutators can skip them exactly.
    pub fn strip_scalar_part(&self) -> OperatorSpec {
        match self {
            OperatorSpec::PolynomialInB { grid, coeffs } if coeffs.len() > 1 && coeffs[0] != ZERO => {
                let mut c = coeffs.clone();
                c[0] = ZERO;
                OperatorSpec::PolynomialInB { grid: *grid, coeffs: c }
            }
            OperatorSpec::Sum(a, b) => match (a.scalar_identity(), b.scalar_identity()) {
                (Some(_), Some(_)) => OperatorSpec::poly_b_on(self.grid().unwrap_or_default(), &[]),
                (Some(_), None) => b.strip_scalar_part(),
                (None, Some(_)) => a.strip_scalar_part(),
                (None, None) => OperatorSpec::sum(a.strip_scalar_part(), b.strip_scalar_part()),
            },
            OperatorSpec::Scaled(c, inner) => OperatorSpec::scaled(*c, inner.strip_scalar_part()),
            OperatorSpec::Adjoint(inner) => OperatorSpec::adjoint(inner.strip_scalar_part()),
            other => {
                if other.scalar_identity().is_some() {
                    OperatorSpec::poly_b_on(other.grid().unwrap_or_default(), &[])
                } else {
                    other.clone()
                }
            }
        }
    }

    /// Square matrix when the operator is finite-rank and given by explicit
    /// matrices; spectral questions treat it as acting on the span of that
    /// square window.
    pub fn finite_model(&self) -> Option<WindowedMatrix> {
        match self {
            OperatorSpec::FiniteMatrix(m) => {
                let w = m.window().square_hull();
                Some(m.restrict_to(w))
            }
            OperatorSpec::Scaled(c, inner) => inner.finite_model().map(|m| m.scale(*c)),
            OperatorSpec::Adjoint(inner) => inner.finite_model().map(|m| m.adjoint()),
            OperatorSpec::Sum(a, b) => {
                let (ma, mb) = (a.finite_model()?, b.finite_model()?);
                let sum = &ma + &mb;
                let w = sum.window().square_hull();
                Some(sum.restrict_to(w))
            }
            _ => None,
        }
    }

    /// Closed-form spectrum where one is known.
    pub fn known_spectrum(&self) -> KnownSpectrum {
        match self.spectrum_inner() {
            Some(s) => KnownSpectrum::Known(s),
            None => KnownSpectrum::Unknown,
        }
    }

    fn spectrum_inner(&self) -> Option<SpectralSet> {
        let unit_region = |grid: Grid, radius: f64, center: Complex| match grid {
            Grid::Unilateral => SpectralSet::disk(center, radius),
            Grid::Bilateral => SpectralSet::circle(center, radius),
        };
        match self {
            OperatorSpec::Diagonal { grid, alphas } => Some(SpectralSet::points(alphas.finite_range(*grid)?)),
            OperatorSpec::BackwardShift { grid } | OperatorSpec::ForwardShift { grid } => {
                Some(unit_region(*grid, 1.0, ZERO))
            }
            OperatorSpec::WeightedBackwardShift { grid, weights } => match weights.finite_range(*grid)?.as_slice() {
                [w] => Some(unit_region(*grid, w.norm(), ZERO)),
                _ => None,
            },
            OperatorSpec::PolynomialInB { grid, coeffs } => match coeffs.as_slice() {
                [] => Some(SpectralSet::points(vec![ZERO])),
                [c0] => Some(SpectralSet::points(vec![*c0])),
                [c0, c1] => Some(unit_region(*grid, c1.norm(), *c0)),
                _ => None,
            },
            OperatorSpec::FiniteMatrix(_) => {
                let m = self.finite_model()?;
                let eigs = crate::spectral::eigenvalues(&m).ok()?;
                Some(SpectralSet::points(eigs))
            }
            OperatorSpec::Scaled(c, inner) => Some(inner.spectrum_inner()?.scale(*c)),
            OperatorSpec::Adjoint(inner) => Some(inner.spectrum_inner()?.conj()),
            OperatorSpec::Sum(a, b) => {
                if let Some(m) = self.finite_model() {
                    let eigs = crate::spectral::eigenvalues(&m).ok()?;
                    return Some(SpectralSet::points(eigs));
                }
                match (a.scalar_identity(), b.scalar_identity()) {
                    (Some(la), _) => Some(b.spectrum_inner()?.translate(la)),
                    (None, Some(lb)) => Some(a.spectrum_inner()?.translate(lb)),
                    _ => None,
                }
            }
        }
    }

    /// Eigenpair data `(alpha, beta)` with `T x = alpha x` and `T' x* = beta
    /// x*` (transpose), when available in closed form.
    pub fn point_spectrum_pair(&self) -> Option<(Complex, Complex)> {
        match self {
            OperatorSpec::Diagonal { grid, alphas } => {
                let first = grid.first_index().unwrap_or(0);
                Some((alphas.value(first), alphas.value(first + 1)))
            }
            OperatorSpec::Scaled(c, inner) => inner.point_spectrum_pair().map(|(a, b)| (c * a, c * b)),
            OperatorSpec::Sum(a, b) => match (a.scalar_identity(), b.scalar_identity()) {
                (Some(l), _) => b.point_spectrum_pair().map(|(x, y)| (x + l, y + l)),
                (None, Some(l)) => a.point_spectrum_pair().map(|(x, y)| (x + l, y + l)),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SpecJson::from(self)).expect("spec serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: SpecJson = serde_json::from_value(value.clone()).map_err(|e| LabError::InvalidInput(e.to_string()))?;
        let spec = raw.into_spec()?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| LabError::InvalidInput(e.to_string()))?;
        Self::from_json(&value)
    }
}

fn on_grid(grid: Grid, i: i64) -> bool {
    grid.first_index().is_none_or(|first| i >= first)
}

/// A complex number in JSON: `[re, im]` or a bare real.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexJson {
    Pair(f64, f64),
    Real(f64),
}

impl From<ComplexJson> for Complex {
    fn from(c: ComplexJson) -> Self {
        match c {
            ComplexJson::Pair(re, im) => Complex::new(re, im),
            ComplexJson::Real(re) => Complex::new(re, 0.0),
        }
    }
}

impl From<Complex> for ComplexJson {
    fn from(z: Complex) -> Self {
        ComplexJson::Pair(z.re, z.im)
    }
}

fn cvec(v: &[ComplexJson]) -> Vec<Complex> {
    v.iter().map(|&z| z.into()).collect()
}

fn jvec(v: &[Complex]) -> Vec<ComplexJson> {
    v.iter().map(|&z| z.into()).collect()
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RuleJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<ComplexJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<ComplexJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    periodic: Option<Vec<ComplexJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rule: Option<String>,
}

impl RuleJson {
    fn into_rule(self) -> Result<SequenceRule> {
        if let Some(p) = self.periodic {
            return Ok(SequenceRule::Periodic { pattern: cvec(&p) });
        }
        match self.rule.as_deref() {
            Some("reciprocal") => return Ok(SequenceRule::Reciprocal),
            Some(other) => return Err(LabError::InvalidInput(format!("unknown sequence rule {other:?}"))),
            None => {}
        }
        Ok(SequenceRule::Finite {
            start: self.start.unwrap_or(1),
            values: cvec(&self.values.unwrap_or_default()),
            tail: self.tail.map_or(ZERO, Into::into),
        })
    }

    fn from_rule(rule: &SequenceRule) -> Self {
        let mut out = RuleJson {
            values: None,
            tail: None,
            start: None,
            periodic: None,
            rule: None,
        };
        match rule {
            SequenceRule::Finite { start, values, tail } => {
                out.values = Some(jvec(values));
                out.tail = Some((*tail).into());
                if *start != 1 {
                    out.start = Some(*start);
                }
            }
            SequenceRule::Periodic { pattern } => out.periodic = Some(jvec(pattern)),
            SequenceRule::Reciprocal => out.rule = Some("reciprocal".into()),
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum SpecJson {
    BackwardShift {
        #[serde(default, skip_serializing_if = "is_false")]
        bilateral: bool,
    },
    ForwardShift {
        #[serde(default, skip_serializing_if = "is_false")]
        bilateral: bool,
    },
    WeightedBackwardShift {
        #[serde(default, skip_serializing_if = "is_false")]
        bilateral: bool,
        #[serde(flatten)]
        weights: RuleJson,
    },
    Diag {
        #[serde(default, skip_serializing_if = "is_false")]
        bilateral: bool,
        #[serde(flatten)]
        alphas: RuleJson,
    },
    PolyB {
        #[serde(default, skip_serializing_if = "is_false")]
        bilateral: bool,
        coeffs: Vec<ComplexJson>,
    },
    Finite {
        matrix: MatrixFile,
    },
    Scaled {
        c: ComplexJson,
        inner: Box<SpecJson>,
    },
    Sum {
        left: Box<SpecJson>,
        right: Box<SpecJson>,
    },
    Adjoint {
        inner: Box<SpecJson>,
    },
}

impl SpecJson {
    fn into_spec(self) -> Result<OperatorSpec> {
        Ok(match self {
            SpecJson::BackwardShift { bilateral } => OperatorSpec::BackwardShift {
                grid: Grid::from_flag(bilateral),
            },
            SpecJson::ForwardShift { bilateral } => OperatorSpec::ForwardShift {
                grid: Grid::from_flag(bilateral),
            },
            SpecJson::WeightedBackwardShift { bilateral, weights } => OperatorSpec::WeightedBackwardShift {
                grid: Grid::from_flag(bilateral),
                weights: weights.into_rule()?,
            },
            SpecJson::Diag { bilateral, alphas } => OperatorSpec::Diagonal {
                grid: Grid::from_flag(bilateral),
                alphas: alphas.into_rule()?,
            },
            SpecJson::PolyB { bilateral, coeffs } => {
                OperatorSpec::poly_b_on(Grid::from_flag(bilateral), &cvec(&coeffs))
            }
            SpecJson::Finite { matrix } => OperatorSpec::FiniteMatrix(matrix.to_matrix()?),
            SpecJson::Scaled { c, inner } => OperatorSpec::scaled(c.into(), inner.into_spec()?),
            SpecJson::Sum { left, right } => OperatorSpec::sum(left.into_spec()?, right.into_spec()?),
            SpecJson::Adjoint { inner } => OperatorSpec::adjoint(inner.into_spec()?),
        })
    }
}

impl From<&OperatorSpec> for SpecJson {
    fn from(spec: &OperatorSpec) -> Self {
        match spec {
            OperatorSpec::BackwardShift { grid } => SpecJson::BackwardShift {
                bilateral: grid.is_bilateral(),
            },
            OperatorSpec::ForwardShift { grid } => SpecJson::ForwardShift {
                bilateral: grid.is_bilateral(),
            },
            OperatorSpec::WeightedBackwardShift { grid, weights } => SpecJson::WeightedBackwardShift {
                bilateral: grid.is_bilateral(),
                weights: RuleJson::from_rule(weights),
            },
            OperatorSpec::Diagonal { grid, alphas } => SpecJson::Diag {
                bilateral: grid.is_bilateral(),
                alphas: RuleJson::from_rule(alphas),
            },
            OperatorSpec::PolynomialInB { grid, coeffs } => SpecJson::PolyB {
                bilateral: grid.is_bilateral(),
                coeffs: jvec(coeffs),
            },
            OperatorSpec::FiniteMatrix(m) => SpecJson::Finite {
                matrix: MatrixFile::from_matrix(m),
            },
            OperatorSpec::Scaled(c, inner) => SpecJson::Scaled {
                c: (*c).into(),
                inner: Box::new(inner.as_ref().into()),
            },
            OperatorSpec::Sum(a, b) => SpecJson::Sum {
                left: Box::new(a.as_ref().into()),
                right: Box::new(b.as_ref().into()),
            },
            OperatorSpec::Adjoint(inner) => SpecJson::Adjoint {
                inner: Box::new(inner.as_ref().into()),
            },
        }
    }
}

impl Serialize for OperatorSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = SpecJson::deserialize(d)?
            .into_spec()
            .map_err(serde::de::Error::custom)?;
        spec.validate().map_err(serde::de::Error::custom)?;
        Ok(spec)
    }
}
