//! Finite evidence that orbits of `Delta_{cB}` and `Delta_{p(B)}` keep away
//! from `E_11`, together with the diagonal-series identity behind it.
//!
//! For `n` past the corner index `k_eps`, the main diagonal of the `n`-th
//! iterate minus `E_11` is encoded as `g_n(z)` and evaluated at a point `z0`
//! where the two available bounds on `|g_n(z0)|` cannot both hold if the
//! orbit came within `eps` of the target.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::CorpusManifest;
use crate::linalg::{norm, Complex, Grid, NormKind, WindowedMatrix};
use crate::maps::{orbit, ElementaryMap};
use crate::operators::OperatorSpec;
use crate::series::{diag_series, eval, main_diagonal};
use crate::{LabError, Result};

/// Relative tolerance for `|direct - formula| <= tol (1 + |direct|)`.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateVerdict {
    /// Every checked step stayed at distance `>= eps`.
    NoNearApproachObserved,
    /// Some step came within `eps`; the identity checks still held.
    NearApproachObserved,
    /// The series identity failed for at least one step.
    IdentityViolation,
}

/// Power of the leading coefficient used in the polynomial formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LeadingExponent {
    /// `c_m^n`, one factor per iteration.
    #[default]
    Iterations,
    /// `c_m^m`.
    Degree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub n: usize,
    pub orbit_distance: f64,
    /// `f_n(z0)` for `cB`, `f_{mn}(z0)` for `p(B)`.
    pub f_n_at_z0: Complex,
    pub g_n_at_z0_direct: Complex,
    pub g_n_at_z0_formula: Complex,
    /// `eps / (1 - |z0|)`: bound on `|g_n(z0)|` if the step were within `eps`.
    pub bound_upper: f64,
    /// `1 - |gamma (1 - z0^m)^n f(z0)|`: lower bound on `|g_n(z0)|`.
    pub bound_lower: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// `c` for `cB`, the leading coefficient `c_m` for `p(B)`.
    pub c: Complex,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<Vec<Complex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<LeadingExponent>,
    pub epsilon: f64,
    pub n_max: usize,
    pub k_eps: usize,
    pub z0: Complex,
    pub per_n: Vec<CertificateRow>,
    pub verdict: CertificateVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusManifest>,
}

impl CertificateReport {
    /// True when every row is consistent and no step came within `eps`.
    pub fn is_clean(&self) -> bool {
        self.verdict == CertificateVerdict::NoNearApproachObserved
    }
}

/// `||A - P_k A||_Op` for `k = 0..=K`, where `K` is the last index of the
/// support (so the final tail is zero).
pub fn corner_tails(a: &WindowedMatrix) -> Vec<f64> {
    let s = a.support();
    let extent = if s.is_empty() {
        0
    } else {
        (s.row_end().max(s.col_end()) - 1).max(0) as usize
    };
    (0..=extent)
        .map(|k| {
            let tail = a - &crate::maps::proj_corner(a, k);
            norm(&tail, NormKind::Operator)
        })
        .collect()
}

/// Smallest `k` such that `||A - P_k' A||_Op < eps` for every `k' >= k`.
pub fn k_epsilon(a: &WindowedMatrix, eps: f64) -> usize {
    let tails = corner_tails(a);
    let mut k = tails.len();
    while k > 0 && tails[k - 1] < eps {
        k -= 1;
    }
    k
}

fn check_common(a: &WindowedMatrix, eps: f64) -> Result<()> {
    if a.grid() != Grid::Unilateral {
        return Err(LabError::PreconditionViolated(
            "certificates need a matrix on the unilateral grid".into(),
        ));
    }
    if !(eps > 0.0 && eps < 1.0 / 3.0) {
        return Err(LabError::PreconditionViolated(format!(
            "epsilon must lie in (0, 1/3) so that z0 is inside the unit disk, got {eps}"
        )));
    }
    Ok(())
}

fn check_smallness(c: Complex, eps: f64) -> Result<()> {
    if 3.0 * c.norm() * eps >= 1.0 {
        return Err(LabError::PreconditionViolated(format!(
            "3|c| eps = {} must be < 1",
            3.0 * c.norm() * eps
        )));
    }
    Ok(())
}

/// Certificate for `Delta_{cB}` started at `a`.
pub fn certify_cb(a: &WindowedMatrix, c: Complex, eps: f64, n_max: usize) -> Result<CertificateReport> {
    check_common(a, eps)?;
    check_smallness(c, eps)?;
    let op = OperatorSpec::scaled(c, OperatorSpec::backward_shift());
    let mut report = run(a, &op, c, 1, LeadingExponent::Iterations, eps, n_max, false)?;
    report.exponent = None;
    Ok(report)
}

/// Certificate for `Delta_{p(B)}` with `p(z) = sum coeffs[k] z^k`, degree
/// `m >= 1`. The identity is checked on the `D_{mn}` part of `a`, the only
/// diagonal whose image under `n` steps reaches the main diagonal through
/// the leading term alone.
pub fn certify_pb(
    a: &WindowedMatrix,
    coeffs: &[Complex],
    eps: f64,
    n_max: usize,
    exponent: LeadingExponent,
) -> Result<CertificateReport> {
    check_common(a, eps)?;
    let op = OperatorSpec::poly_b(coeffs);
    let OperatorSpec::PolynomialInB { coeffs: trimmed, .. } = &op else {
        unreachable!("poly_b builds a polynomial spec")
    };
    if trimmed.len() < 2 {
        return Err(LabError::PreconditionViolated(
            "polynomial must have degree >= 1".into(),
        ));
    }
    let m = trimmed.len() - 1;
    let c_m = trimmed[m];
    check_smallness(c_m, eps)?;
    let mut report = run(a, &op, c_m, m, exponent, eps, n_max, true)?;
    report.poly = Some(trimmed.clone());
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn run(
    a: &WindowedMatrix,
    op: &OperatorSpec,
    c: Complex,
    m: usize,
    exponent: LeadingExponent,
    eps: f64,
    n_max: usize,
    project: bool,
) -> Result<CertificateReport> {
    let k_eps = k_epsilon(a, eps);
    let z0 = if m == 1 {
        1.0 - 3.0 * eps
    } else {
        (1.0 - 3.0 * eps).powf(1.0 / m as f64)
    };
    let z0c = Complex::new(z0, 0.0);
    let mut report = CertificateReport {
        c,
        poly: None,
        exponent: Some(exponent),
        epsilon: eps,
        n_max,
        k_eps,
        z0: z0c,
        per_n: Vec::new(),
        verdict: CertificateVerdict::NoNearApproachObserved,
        note: None,
        corpus: None,
    };
    if c == Complex::new(0.0, 0.0) {
        report.note = Some("c = 0: the map is zero and has no dense orbit".into());
        return Ok(report);
    }
    if k_eps >= n_max {
        report.note = Some(format!("k_eps = {k_eps} leaves no steps in (k_eps, n_max]"));
    }
    let map = ElementaryMap::commutator(op.clone());
    let values: Vec<WindowedMatrix> = orbit(&map, a, n_max, &[], NormKind::Operator)?
        .into_iter()
        .map(|r| r.value)
        .collect();
    let s = a.support();
    let extent = if s.is_empty() {
        0
    } else {
        (s.row_end().max(s.col_end()) - 1) as usize
    };
    let length = extent + m * n_max + 1;
    let target = WindowedMatrix::unit(1, 1);
    let bound_upper = eps / (1.0 - z0);

    let rows: Vec<Result<CertificateRow>> = ((k_eps + 1)..=n_max)
        .into_par_iter()
        .map(|n| {
            let diff = &values[n] - &target;
            let orbit_distance = norm(&diff, NormKind::Operator);
            let f = diag_series(a, (m * n) as i64, length);
            let f_at = eval(&f, z0c)?;
            let direct_source = if project {
                let pa = crate::maps::proj_subdiagonal(a, (m * n) as i64);
                let it = crate::maps::apply_map(&ElementaryMap::power(map.clone(), n as u32), &pa)?;
                &it - &target
            } else {
                diff
            };
            let direct = eval(&main_diagonal(&direct_source, length), z0c)?;
            let gamma = match exponent {
                LeadingExponent::Iterations => c.powu(n as u32),
                LeadingExponent::Degree => c.powu(m as u32),
            };
            let lead = gamma * Complex::new((1.0 - z0.powi(m as i32)).powi(n as i32), 0.0) * f_at;
            let formula = lead - 1.0;
            let consistent = (direct - formula).norm() <= IDENTITY_TOL * (1.0 + direct.norm());
            Ok(CertificateRow {
                n,
                orbit_distance,
                f_n_at_z0: f_at,
                g_n_at_z0_direct: direct,
                g_n_at_z0_formula: formula,
                bound_upper,
                bound_lower: 1.0 - lead.norm(),
                consistent,
            })
        })
        .collect();
    report.per_n = rows.into_iter().collect::<Result<_>>()?;
    report.verdict = if report.per_n.iter().any(|r| !r.consistent) {
        CertificateVerdict::IdentityViolation
    } else if report.per_n.iter().any(|r| r.orbit_distance < eps) {
        CertificateVerdict::NearApproachObserved
    } else {
        CertificateVerdict::NoNearApproachObserved
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex {
        Complex::new(x, 0.0)
    }

    #[test]
    fn unit_start_never_approaches() {
        let r = certify_cb(&WindowedMatrix::unit(1, 1), re(1.0), 0.2, 20).unwrap();
        assert_eq!(r.verdict, CertificateVerdict::NoNearApproachObserved);
        assert!(!r.per_n.is_empty());
        for row in &r.per_n {
            assert!(row.orbit_distance >= 1.0 - 1e-12, "{row:?}");
            assert!(row.consistent);
        }
        assert!((r.per_n[0].bound_upper - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn preconditions() {
        let a = WindowedMatrix::unit(1, 1);
        assert!(matches!(
            certify_cb(&a, re(1.0), 0.34, 24),
            Err(LabError::PreconditionViolated(_))
        ));
        assert!(matches!(
            certify_pb(&a, &[re(1.0)], 0.1, 4, LeadingExponent::Iterations),
            Err(LabError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn zero_multiple_short_circuits() {
        let r = certify_cb(&WindowedMatrix::unit(2, 1), re(0.0), 0.2, 10).unwrap();
        assert!(r.per_n.is_empty());
        assert!(r.note.is_some());
        assert_eq!(r.verdict, CertificateVerdict::NoNearApproachObserved);
    }

    #[test]
    fn k_epsilon_on_units() {
        assert_eq!(k_epsilon(&WindowedMatrix::unit(3, 1), 0.5), 3);
        assert_eq!(k_epsilon(&WindowedMatrix::zero(Grid::Unilateral), 0.5), 0);
    }

    #[test]
    fn degree_one_polynomial_matches_cb() {
        let mut a = WindowedMatrix::zeros(Grid::Unilateral, crate::linalg::Window::square(1, 5)).unwrap();
        for i in 1..=5 {
            for j in 1..=5 {
                a.set(
                    i,
                    j,
                    Complex::new(
                        0.5f64.powi(i.max(j) as i32),
                        0.1 * (i - j) as f64 * 0.5f64.powi(i.max(j) as i32),
                    ),
                );
            }
        }
        let c = Complex::new(1.2, 0.3);
        let cb = certify_cb(&a, c, 0.2, 10).unwrap();
        let pb = certify_pb(&a, &[re(0.0), c], 0.2, 10, LeadingExponent::Iterations).unwrap();
        assert_eq!(cb.per_n, pb.per_n);
        assert_eq!((cb.k_eps, cb.z0, cb.c), (pb.k_eps, pb.z0, pb.c));
    }
}
