//! Spectral sets, their difference sets, the component test against the
//! unit circle, and the verdict engine for commutator maps.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::linalg::{eigenvalues_dense, Complex, WindowedMatrix};
use crate::operators::{KnownSpectrum, OperatorSpec};
use crate::{LabError, Result};

/// Single-linkage radius for clustering points into components.
pub const POINT_MERGE_TOL: f64 = 1e-6;
/// Tolerance for "meets the unit circle".
pub const UNIT_CIRCLE_TOL: f64 = 1e-9;
/// Normality threshold `||T*T - TT*||` for finite matrices.
pub const NORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub center: Complex,
    pub r_inner: f64,
    pub r_outer: f64,
}

/// Finite union of points, closed disks, circles and closed annuli.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectralSet {
    pub points: Vec<Complex>,
    pub disks: Vec<Disk>,
    pub circles: Vec<Disk>,
    pub annuli: Vec<Annulus>,
    /// Set when some part is an over-approximation.
    #[serde(default)]
    pub conservative: bool,
}

/// One part of a set viewed as `{c + w : r <= |w| <= R}`.
#[derive(Debug, Clone, Copy)]
struct Part {
    center: Complex,
    r: f64,
    big_r: f64,
}

impl Part {
    /// Range of distances from `z` to points of the part.
    fn distance_range(&self, z: Complex) -> (f64, f64) {
        let d = (self.center - z).norm();
        (interval_dist(d, self.r, self.big_r), d + self.big_r)
    }

    fn is_point(&self) -> bool {
        self.big_r == 0.0
    }
}

fn interval_dist(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

fn cmp_complex(a: &Complex, b: &Complex) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl SpectralSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Finite point set; exact duplicates are removed and points sorted.
    pub fn points(mut pts: Vec<Complex>) -> Self {
        pts.sort_by(cmp_complex);
        pts.dedup();
        SpectralSet {
            points: pts,
            ..Self::default()
        }
    }

    pub fn disk(center: Complex, radius: f64) -> Self {
        Self::region(center, 0.0, radius)
    }

    pub fn circle(center: Complex, radius: f64) -> Self {
        Self::region(center, radius, radius)
    }

    pub fn annulus(center: Complex, r_inner: f64, r_outer: f64) -> Self {
        assert!(0.0 <= r_inner && r_inner <= r_outer, "annulus radii out of order");
        Self::region(center, r_inner, r_outer)
    }

    /// The normalized form of `{c + w : r <= |w| <= R}`.
    fn region(center: Complex, r: f64, big_r: f64) -> Self {
        let mut out = Self::default();
        out.push_part(Part { center, r, big_r });
        out
    }

    fn push_part(&mut self, p: Part) {
        if p.big_r == 0.0 {
            self.points.push(p.center);
        } else if p.r == 0.0 {
            self.disks.push(Disk {
                center: p.center,
                radius: p.big_r,
            });
        } else if p.r == p.big_r {
            self.circles.push(Disk {
                center: p.center,
                radius: p.r,
            });
        } else {
            self.annuli.push(Annulus {
                center: p.center,
                r_inner: p.r,
                r_outer: p.big_r,
            });
        }
    }

    fn parts(&self) -> Vec<Part> {
        let mut out: Vec<Part> = self
            .points
            .iter()
            .map(|&c| Part {
                center: c,
                r: 0.0,
                big_r: 0.0,
            })
            .collect();
        out.extend(self.disks.iter().map(|d| Part {
            center: d.center,
            r: 0.0,
            big_r: d.radius,
        }));
        out.extend(self.circles.iter().map(|d| Part {
            center: d.center,
            r: d.radius,
            big_r: d.radius,
        }));
        out.extend(self.annuli.iter().map(|a| Part {
            center: a.center,
            r: a.r_inner,
            big_r: a.r_outer,
        }));
        out
    }

    fn from_parts(parts: impl IntoIterator<Item = Part>, conservative: bool) -> Self {
        let mut out = Self::default();
        for p in parts {
            out.push_part(p);
        }
        out.conservative = conservative;
        out.canonicalize();
        out
    }

    fn canonicalize(&mut self) {
        self.points.sort_by(cmp_complex);
        self.points.dedup();
        let disk_key = |a: &Disk, b: &Disk| cmp_complex(&a.center, &b.center).then(a.radius.total_cmp(&b.radius));
        self.disks.sort_by(disk_key);
        self.disks.dedup();
        self.circles.sort_by(disk_key);
        self.circles.dedup();
        self.annuli.sort_by(|a, b| {
            cmp_complex(&a.center, &b.center)
                .then(a.r_inner.total_cmp(&b.r_inner))
                .then(a.r_outer.total_cmp(&b.r_outer))
        });
        self.annuli.dedup();
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.disks.is_empty() && self.circles.is_empty() && self.annuli.is_empty()
    }

    /// Only finitely many points.
    pub fn is_discrete(&self) -> bool {
        self.disks.is_empty() && self.circles.is_empty() && self.annuli.is_empty()
    }

    pub fn union(&self, other: &Self) -> Self {
        let parts = self.parts().into_iter().chain(other.parts());
        Self::from_parts(parts, self.conservative || other.conservative)
    }

    /// `{c z : z in S}`.
    pub fn scale(&self, c: Complex) -> Self {
        let k = c.norm();
        Self::from_parts(
            self.parts().into_iter().map(|p| Part {
                center: c * p.center,
                r: k * p.r,
                big_r: k * p.big_r,
            }),
            self.conservative,
        )
    }

    /// `{conj z : z in S}`.
    pub fn conj(&self) -> Self {
        Self::from_parts(
            self.parts().into_iter().map(|p| Part {
                center: p.center.conj(),
                ..p
            }),
            self.conservative,
        )
    }

    /// `{z + lambda : z in S}`.
    pub fn translate(&self, lambda: Complex) -> Self {
        Self::from_parts(
            self.parts().into_iter().map(|p| Part {
                center: p.center + lambda,
                ..p
            }),
            self.conservative,
        )
    }

    /// Distance from `z` to the set.
    pub fn distance(&self, z: Complex) -> f64 {
        self.parts()
            .iter()
            .map(|p| p.distance_range(z).0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, z: Complex, tol: f64) -> bool {
        self.distance(z) <= tol
    }
}

/// `S - S = {lambda - mu : lambda, mu in S}`.
///
/// Each pair of parts contributes `{(c1 - c2) + w}` with `|w|` ranging over
/// `[dist([r1, R1], [r2, R2]), R1 + R2]`, which is exact for all families.
pub fn minkowski_diff(s: &SpectralSet) -> SpectralSet {
    let parts = s.parts();
    let mut out = Vec::with_capacity(parts.len() * parts.len());
    for a in &parts {
        for b in &parts {
            let gap = if a.big_r < b.r {
                b.r - a.big_r
            } else if b.big_r < a.r {
                a.r - b.big_r
            } else {
                0.0
            };
            out.push(Part {
                center: a.center - b.center,
                r: gap,
                big_r: a.big_r + b.big_r,
            });
        }
    }
    SpectralSet::from_parts(out, s.conservative)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KitaiResult {
    pub passes: bool,
    /// A connected component that misses the unit circle.
    pub failing_component: Option<SpectralSet>,
}

/// Checks that every connected component meets the unit circle.
pub fn kitai_test(s: &SpectralSet) -> KitaiResult {
    let parts = s.parts();
    let n = parts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if parts_touch(&parts[a], &parts[b]) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut roots: Vec<usize> = (0..n).map(|k| find(&mut parent, k)).collect();
    let members = roots.clone();
    roots.sort_unstable();
    roots.dedup();
    for root in roots {
        let component: Vec<Part> = (0..n).filter(|&k| members[k] == root).map(|k| parts[k]).collect();
        let meets = component.iter().any(|p| {
            let (lo, hi) = p.distance_range(Complex::new(0.0, 0.0));
            lo - UNIT_CIRCLE_TOL <= 1.0 && 1.0 <= hi + UNIT_CIRCLE_TOL
        });
        if !meets {
            return KitaiResult {
                passes: false,
                failing_component: Some(SpectralSet::from_parts(component, false)),
            };
        }
    }
    KitaiResult {
        passes: true,
        failing_component: None,
    }
}

fn parts_touch(a: &Part, b: &Part) -> bool {
    if a.is_point() && b.is_point() {
        return (a.center - b.center).norm() <= POINT_MERGE_TOL;
    }
    // distances from b's center to a, against b's radial range
    let (lo, hi) = a.distance_range(b.center);
    let tol = if a.is_point() || b.is_point() {
        POINT_MERGE_TOL
    } else {
        0.0
    };
    lo <= b.big_r + tol && b.r <= hi + tol
}

/// Eigenvalues of a square windowed matrix, sorted by `(re, im)`.
pub fn eigenvalues(m: &WindowedMatrix) -> Result<Vec<Complex>> {
    if m.rows() != m.cols() {
        return Err(LabError::InvalidInput(format!(
            "eigenvalues need a square window, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    eigenvalues_dense(m.rows(), m.as_slice())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conclusion {
    NotHypercyclic,
    NotSupercyclic,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    KitaiComponent,
    RieszSpectrum,
    PointSpectrumPair,
    NormalCommutator,
    ZeroMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub conclusion: Conclusion,
    pub rule: Option<Rule>,
    pub evidence: serde_json::Value,
}

impl Verdict {
    fn inconclusive(reason: &str) -> Self {
        Verdict {
            conclusion: Conclusion::Inconclusive,
            rule: None,
            evidence: json!({ "reason": reason }),
        }
    }
}

/// `Some(lambda)` if the finite model is `lambda I` on its window.
fn scalar_on_window(m: &WindowedMatrix) -> Option<Complex> {
    let w = m.window();
    if w.is_empty() {
        return Some(Complex::new(0.0, 0.0));
    }
    let lambda = m.get(w.row_offset, w.col_offset);
    for i in w.row_offset..w.row_end() {
        for j in w.col_offset..w.col_end() {
            let expected = if i == j { lambda } else { Complex::new(0.0, 0.0) };
            if m.get(i, j) != expected {
                return None;
            }
        }
    }
    Some(lambda)
}

/// `||T*T - TT*||` in the operator norm.
pub fn normality_defect(m: &WindowedMatrix) -> f64 {
    let a = m.adjoint();
    let d = &a.matmul(m) - &m.matmul(&a);
    crate::linalg::norm(&d, crate::linalg::NormKind::Operator)
}

/// Verdict from a spectrum alone: the discrete rule and the component rule.
pub fn verdict_from_spectrum(sigma: &SpectralSet) -> Verdict {
    if sigma.is_empty() {
        return Verdict::inconclusive("empty spectrum");
    }
    let sigma_j = minkowski_diff(sigma);
    let kitai = kitai_test(&sigma_j);
    if !kitai.passes && !sigma_j.conservative {
        let rule = if sigma.is_discrete() {
            Rule::RieszSpectrum
        } else {
            Rule::KitaiComponent
        };
        return Verdict {
            conclusion: Conclusion::NotHypercyclic,
            rule: Some(rule),
            evidence: json!({
                "sigma": sigma,
                "sigma_j": sigma_j,
                "failing_component": kitai.failing_component,
            }),
        };
    }
    Verdict::inconclusive("every component of sigma(T) - sigma(T) meets the unit circle")
}

/// Decide what can be said about the commutator map of `t`.
pub fn verdict_commutator(t: &OperatorSpec) -> Verdict {
    if let Err(e) = t.validate() {
        return Verdict::inconclusive(&e.to_string());
    }
    let model = t.finite_model();
    let scalar = t
        .scalar_identity()
        .or_else(|| model.as_ref().and_then(scalar_on_window));
    if let Some(lambda) = scalar {
        return Verdict {
            conclusion: Conclusion::NotHypercyclic,
            rule: Some(Rule::ZeroMap),
            evidence: json!({ "lambda": lambda }),
        };
    }
    if let Some(m) = &model {
        let defect = normality_defect(m);
        if defect <= NORMAL_TOL {
            return Verdict {
                conclusion: Conclusion::NotSupercyclic,
                rule: Some(Rule::NormalCommutator),
                evidence: json!({ "normality_defect": defect }),
            };
        }
    }
    if let KnownSpectrum::Known(sigma) = t.known_spectrum() {
        let v = verdict_from_spectrum(&sigma);
        if v.conclusion != Conclusion::Inconclusive {
            return v;
        }
    }
    if let Some((alpha, beta)) = t.point_spectrum_pair() {
        return Verdict {
            conclusion: Conclusion::NotHypercyclic,
            rule: Some(Rule::PointSpectrumPair),
            evidence: json!({
                "alpha": alpha,
                "beta": beta,
                "beta_minus_alpha": beta - alpha,
            }),
        };
    }
    Verdict::inconclusive("no rule applies")
}
