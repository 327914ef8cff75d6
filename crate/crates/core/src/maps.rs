//! Left and right multipliers, commutator maps and their exact orbits on
//! finitely supported matrices.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{hs_inner, norm, Complex, Grid, NormKind, Window, WindowedMatrix};
use crate::operators::OperatorSpec;
use crate::sampling;
use crate::{LabError, Result};

/// Largest number of rows or columns an orbit window may reach.
pub const DEFAULT_WINDOW_CAP: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum ElementaryMap {
    /// `S -> T S`.
    Left {
        op: OperatorSpec,
    },
    /// `S -> S T`.
    Right {
        op: OperatorSpec,
    },
    /// `S -> T S - S T`.
    Commutator {
        op: OperatorSpec,
    },
    Power {
        inner: Box<ElementaryMap>,
        n: u32,
    },
    Scaled {
        c: Complex,
        inner: Box<ElementaryMap>,
    },
    Sum {
        left: Box<ElementaryMap>,
        right: Box<ElementaryMap>,
    },
}

impl ElementaryMap {
    pub fn left(op: OperatorSpec) -> Self {
        ElementaryMap::Left { op }
    }

    pub fn right(op: OperatorSpec) -> Self {
        ElementaryMap::Right { op }
    }

    pub fn commutator(op: OperatorSpec) -> Self {
        ElementaryMap::Commutator { op }
    }

    pub fn power(inner: ElementaryMap, n: u32) -> Self {
        ElementaryMap::Power {
            inner: Box::new(inner),
            n,
        }
    }

    pub fn scaled(c: Complex, inner: ElementaryMap) -> Self {
        ElementaryMap::Scaled {
            c,
            inner: Box::new(inner),
        }
    }

    pub fn sum(left: ElementaryMap, right: ElementaryMap) -> Self {
        ElementaryMap::Sum {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::InvalidInput(e.to_string()))
    }

    fn check_grid(&self, grid: Grid) -> Result<()> {
        match self {
            ElementaryMap::Left { op } | ElementaryMap::Right { op } | ElementaryMap::Commutator { op } => {
                let g = op.grid()?;
                if g != grid {
                    return Err(LabError::BilateralMismatch {
                        operator: g,
                        operand: grid,
                    });
                }
                op.validate()
            }
            ElementaryMap::Power { inner, .. } | ElementaryMap::Scaled { inner, .. } => inner.check_grid(grid),
            ElementaryMap::Sum { left, right } => {
                left.check_grid(grid)?;
                right.check_grid(grid)
            }
        }
    }

    /// Window containing the image of any matrix supported in `w`.
    pub fn image_window(&self, grid: Grid, w: Window) -> Window {
        if w.is_empty() {
            return w;
        }
        match self {
            ElementaryMap::Left { op } => {
                let (lo, hi) = op.image_rows(grid, w.row_offset, w.row_end());
                Window::from_bounds(lo, hi, w.col_offset, w.col_end())
            }
            ElementaryMap::Right { op } => {
                let (lo, hi) = op.right_image_cols(grid, w.col_offset, w.col_end());
                Window::from_bounds(w.row_offset, w.row_end(), lo, hi)
            }
            ElementaryMap::Commutator { op } => {
                let s = op.strip_scalar_part();
                let l = ElementaryMap::left(s.clone()).image_window(grid, w);
                let r = ElementaryMap::right(s).image_window(grid, w);
                l.hull(&r)
            }
            ElementaryMap::Power { inner, n } => {
                let mut cur = w;
                for _ in 0..*n {
                    cur = inner.image_window(grid, cur);
                }
                cur
            }
            ElementaryMap::Scaled { inner, .. } => inner.image_window(grid, w),
            ElementaryMap::Sum { left, right } => left.image_window(grid, w).hull(&right.image_window(grid, w)),
        }
    }
}

fn zero_on(grid: Grid, w: Window) -> WindowedMatrix {
    if w.is_empty() {
        WindowedMatrix::zero(grid)
    } else {
        WindowedMatrix::zeros(grid, w).expect("image windows stay on the grid")
    }
}

/// `out += sign * T A`, restricted to the rows of `out`.
fn accumulate_left(t: &OperatorSpec, a: &WindowedMatrix, out: &mut WindowedMatrix, sign: f64) {
    let Some(band) = t.band() else { return };
    let w = out.window();
    for (l, j, z) in a.nonzeros() {
        for i in (l + band.lo).max(w.row_offset)..=(l + band.hi).min(w.row_end() - 1) {
            let e = t.entry(i, l);
            if e != Complex::new(0.0, 0.0) {
                out.add_at(i, j, (e * z) * sign);
            }
        }
    }
}

/// `out += sign * A T`, restricted to the columns of `out`.
fn accumulate_right(t: &OperatorSpec, a: &WindowedMatrix, out: &mut WindowedMatrix, sign: f64) {
    let Some(band) = t.band() else { return };
    let w = out.window();
    for (i, l, z) in a.nonzeros() {
        for j in (l - band.hi).max(w.col_offset)..=(l - band.lo).min(w.col_end() - 1) {
            let e = t.entry(l, j);
            if e != Complex::new(0.0, 0.0) {
                out.add_at(i, j, (z * e) * sign);
            }
        }
    }
}

/// Exact image of `a` under `m`, on the window given by the support growth.
pub fn apply_map(m: &ElementaryMap, a: &WindowedMatrix) -> Result<WindowedMatrix> {
    m.check_grid(a.grid())?;
    apply_unchecked(m, a)
}

fn apply_unchecked(m: &ElementaryMap, a: &WindowedMatrix) -> Result<WindowedMatrix> {
    let grid = a.grid();
    let support = a.support();
    let w = m.image_window(grid, support);
    if w.is_empty() {
        return Ok(WindowedMatrix::zero(grid));
    }
    Ok(match m {
        ElementaryMap::Left { op } => {
            let mut out = zero_on(grid, w);
            accumulate_left(op, a, &mut out, 1.0);
            out
        }
        ElementaryMap::Right { op } => {
            let mut out = zero_on(grid, w);
            accumulate_right(op, a, &mut out, 1.0);
            out
        }
        ElementaryMap::Commutator { op } => {
            // scalar summands commute with everything
            let s = op.strip_scalar_part();
            let mut out = zero_on(grid, w);
            accumulate_left(&s, a, &mut out, 1.0);
            accumulate_right(&s, a, &mut out, -1.0);
            out
        }
        ElementaryMap::Power { inner, n } => {
            let mut cur = a.clone();
            for _ in 0..*n {
                cur = apply_unchecked(inner, &cur)?;
            }
            cur
        }
        ElementaryMap::Scaled { c, inner } => apply_unchecked(inner, a)?.scale(*c),
        ElementaryMap::Sum { left, right } => &apply_unchecked(left, a)? + &apply_unchecked(right, a)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: String,
    pub matrix: WindowedMatrix,
}

impl Target {
    pub fn new(id: impl Into<String>, matrix: WindowedMatrix) -> Self {
        Target { id: id.into(), matrix }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub step: usize,
    pub value: WindowedMatrix,
    pub distances: BTreeMap<String, f64>,
}

/// Window reached by steps `0..=n_max`, checked against `cap`.
pub fn orbit_window(m: &ElementaryMap, a0: &WindowedMatrix, n_max: usize, cap: usize) -> Result<Window> {
    let grid = a0.grid();
    let mut cur = a0.support();
    let mut total = cur;
    for _ in 0..n_max {
        cur = m.image_window(grid, cur);
        total = total.hull(&cur);
        if total.rows > cap || total.cols > cap {
            return Err(LabError::WindowOverflow {
                rows: total.rows,
                cols: total.cols,
                cap,
            });
        }
    }
    Ok(total)
}

pub fn orbit(
    m: &ElementaryMap,
    a0: &WindowedMatrix,
    n_max: usize,
    targets: &[Target],
    kind: NormKind,
) -> Result<Vec<OrbitRecord>> {
    orbit_with_cap(m, a0, n_max, targets, kind, DEFAULT_WINDOW_CAP)
}

/// Steps `0..=n_max` of the orbit of `a0`, each stored on one pre-grown
/// window, with distances to every target.
pub fn orbit_with_cap(
    m: &ElementaryMap,
    a0: &WindowedMatrix,
    n_max: usize,
    targets: &[Target],
    kind: NormKind,
    cap: usize,
) -> Result<Vec<OrbitRecord>> {
    m.check_grid(a0.grid())?;
    for t in targets {
        if t.matrix.grid() != a0.grid() {
            return Err(LabError::BilateralMismatch {
                operator: a0.grid(),
                operand: t.matrix.grid(),
            });
        }
    }
    let window = orbit_window(m, a0, n_max, cap)?;
    let mut records = Vec::with_capacity(n_max + 1);
    let mut cur = a0.clone();
    for step in 0..=n_max {
        if step > 0 {
            cur = apply_unchecked(m, &cur)?;
        }
        let value = cur.reshape_to(window)?;
        let distances = targets
            .iter()
            .map(|t| (t.id.clone(), norm(&(&value - &t.matrix), kind)))
            .collect();
        records.push(OrbitRecord { step, value, distances });
    }
    Ok(records)
}

/// Orbits of several initial matrices, computed in parallel; the output
/// order follows `initials`.
pub fn orbit_sweep(
    m: &ElementaryMap,
    initials: &[WindowedMatrix],
    n_max: usize,
    targets: &[Target],
    kind: NormKind,
) -> Result<Vec<Vec<OrbitRecord>>> {
    initials
        .par_iter()
        .map(|a0| orbit(m, a0, n_max, targets, kind))
        .collect()
}

/// Keeps the entries `(r + k, r)`; negative `k` selects a superdiagonal.
pub fn proj_subdiagonal(a: &WindowedMatrix, k: i64) -> WindowedMatrix {
    let mut out = zero_on(a.grid(), a.window());
    for (i, j, z) in a.nonzeros() {
        if i - j == k {
            out.set(i, j, z);
        }
    }
    out
}

/// Keeps the top-left `k x k` corner `1 <= i, j <= k`.
pub fn proj_corner(a: &WindowedMatrix, k: usize) -> WindowedMatrix {
    if k == 0 {
        return WindowedMatrix::zero(a.grid());
    }
    let corner = Window::square(1, k).intersect(&a.window());
    if corner.is_empty() {
        return WindowedMatrix::zero(a.grid());
    }
    a.restrict_to(corner)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceAdjointReport {
    pub seed: u64,
    pub samples: usize,
    pub dim: usize,
    /// Largest `|<Delta_T S, U> - <S, Delta_{T*} U>|`.
    pub max_residual: f64,
    /// Largest residual divided by `||S||_2 ||U||_2`.
    pub max_scaled_residual: f64,
    pub passes: bool,
}

/// Checks `<Delta_T S, U> = <S, Delta_{T*} U>` in the trace pairing on random
/// `S, U` supported in a `dim x dim` window.
pub fn trace_adjoint_check(t: &OperatorSpec, samples: usize, dim: usize, seed: u64) -> Result<TraceAdjointReport> {
    let grid = t.grid()?;
    let first = grid.first_index().unwrap_or(-(dim as i64) / 2);
    let window = Window::square(first, dim);
    let delta = ElementaryMap::commutator(t.clone());
    let delta_star = ElementaryMap::commutator(OperatorSpec::adjoint(t.clone()));
    let mut rng = sampling::rng(seed);
    let mut max_residual = 0.0f64;
    let mut max_scaled = 0.0f64;
    for _ in 0..samples {
        let s = sampling::random_matrix(&mut rng, grid, window);
        let u = sampling::random_matrix(&mut rng, grid, window);
        let lhs = hs_inner(&apply_map(&delta, &s)?, &u);
        let rhs = hs_inner(&s, &apply_map(&delta_star, &u)?);
        let residual = (lhs - rhs).norm();
        let scale = (s.hs_norm_sq() * u.hs_norm_sq()).sqrt().max(f64::MIN_POSITIVE);
        max_residual = max_residual.max(residual);
        max_scaled = max_scaled.max(residual / scale);
    }
    Ok(TraceAdjointReport {
        seed,
        samples,
        dim,
        max_residual,
        max_scaled_residual: max_scaled,
        passes: max_scaled <= 1e-10,
    })
}

/// Matrix of `m` compressed to the matrix units of `window`: column
/// `q = (i - r0) * cols + (j - c0) + 1` holds the coordinates of `m(E_ij)`.
/// Image entries outside `window` are dropped.
pub fn superoperator_matrix(m: &ElementaryMap, grid: Grid, window: Window) -> Result<WindowedMatrix> {
    let n = window.rows * window.cols;
    let mut out = WindowedMatrix::zeros(Grid::Unilateral, Window::square(1, n))?;
    let index = |i: i64, j: i64| -> i64 { (i - window.row_offset) * window.cols as i64 + (j - window.col_offset) + 1 };
    for i in window.row_offset..window.row_end() {
        for j in window.col_offset..window.col_end() {
            let image = apply_map(m, &WindowedMatrix::unit_on(grid, i, j))?;
            for (k, l, z) in image.nonzeros() {
                if window.contains(k, l) {
                    out.set(index(k, l), index(i, j), z);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex {
        Complex::new(x, 0.0)
    }

    fn delta_b() -> ElementaryMap {
        ElementaryMap::commutator(OperatorSpec::backward_shift())
    }

    #[test]
    fn commutator_of_b_on_units() {
        let out = apply_map(&delta_b(), &WindowedMatrix::unit(1, 1)).unwrap();
        assert!(out.same_operator(&WindowedMatrix::unit(1, 2).scale(re(-1.0))));
        let out = apply_map(&delta_b(), &WindowedMatrix::unit(2, 1)).unwrap();
        let expected = &WindowedMatrix::unit(1, 1) - &WindowedMatrix::unit(2, 2);
        assert!(out.same_operator(&expected));
    }

    #[test]
    fn commutator_of_diagonal_on_unit() {
        let d = OperatorSpec::finite(WindowedMatrix::diag(1, &[re(1.0), re(2.0)]));
        let out = apply_map(&ElementaryMap::commutator(d), &WindowedMatrix::unit(1, 2)).unwrap();
        assert!(out.same_operator(&WindowedMatrix::unit(1, 2).scale(re(-1.0))));
    }

    #[test]
    fn orbit_climbs_subdiagonals() {
        let recs = orbit(&delta_b(), &WindowedMatrix::unit(3, 1), 2, &[], NormKind::Operator).unwrap();
        let diagonal_of = |m: &WindowedMatrix| {
            let ks: Vec<i64> = m.nonzeros().map(|(i, j, _)| i - j).collect();
            assert!(ks.windows(2).all(|w| w[0] == w[1]), "{ks:?}");
            ks[0]
        };
        assert_eq!(
            recs.iter().map(|r| diagonal_of(&r.value)).collect::<Vec<_>>(),
            vec![2, 1, 0]
        );
        // all values live on one window
        assert!(recs.iter().all(|r| r.value.window() == recs[0].value.window()));
    }

    #[test]
    fn power_semantics() {
        let a = WindowedMatrix::unit(4, 2);
        let p = orbit(&ElementaryMap::power(delta_b(), 2), &a, 1, &[], NormKind::Operator).unwrap();
        let q = orbit(&delta_b(), &a, 2, &[], NormKind::Operator).unwrap();
        assert!(p[1].value.same_operator(&q[2].value));
    }

    #[test]
    fn window_cap_is_enforced() {
        let s = ElementaryMap::commutator(OperatorSpec::forward_shift());
        let err = orbit_with_cap(&s, &WindowedMatrix::unit(1, 1), 20, &[], NormKind::Operator, 8).unwrap_err();
        assert!(matches!(err, LabError::WindowOverflow { cap: 8, .. }));
    }

    #[test]
    fn projections() {
        let e21 = WindowedMatrix::unit(2, 1);
        assert!(proj_subdiagonal(&e21, 1).same_operator(&e21));
        assert!(proj_subdiagonal(&e21, 0).is_zero());
        let a = &WindowedMatrix::unit(1, 1) + &WindowedMatrix::unit(2, 2);
        assert!(proj_corner(&a, 1).same_operator(&WindowedMatrix::unit(1, 1)));
        assert!(proj_corner(&a, 0).is_zero());
    }

    #[test]
    fn bilateral_mismatch() {
        let a = WindowedMatrix::unit_on(Grid::Bilateral, 0, 0);
        assert!(matches!(
            apply_map(&delta_b(), &a),
            Err(LabError::BilateralMismatch { .. })
        ));
    }

    #[test]
    fn map_json_round_trip() {
        let m = ElementaryMap::from_json_str(
            r#"{"map":"power","n":2,"inner":{"map":"commutator","op":{"op":"backward_shift"}}}"#,
        )
        .unwrap();
        assert_eq!(m, ElementaryMap::power(delta_b(), 2));
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(ElementaryMap::from_json_str(&text).unwrap(), m);
    }

    #[test]
    fn trace_duality_for_diagonal_and_shift() {
        let d = OperatorSpec::finite(WindowedMatrix::diag(1, &[re(1.0), Complex::i(), re(-1.0)]));
        assert!(trace_adjoint_check(&d, 10, 4, 7).unwrap().passes);
        assert!(
            trace_adjoint_check(&OperatorSpec::backward_shift(), 10, 8, 7)
                .unwrap()
                .passes
        );
    }
}
