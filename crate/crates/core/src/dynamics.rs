//! Concrete checks on operator dynamics: the Hypercyclicity Criterion for
//! explicit witnesses, normal and paranormal property suites, and seeded
//! compact-operator corpora.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::linalg::{norm, rank_one, Complex, Grid, NormKind, Vec2, Window, WindowedMatrix};
use crate::maps::{apply_map, ElementaryMap};
use crate::operators::{OperatorSpec, SequenceRule};
use crate::sampling;
use crate::{LabError, Result};

/// Tolerance for the limits in the criterion and the property suites.
pub const HC_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub seed: u64,
    pub size: usize,
    pub decay: f64,
}

/// `a_ij = decay^max(i, j) g_ij` on `1..=size`, with `g_ij` uniform in the
/// unit disk drawn row by row from the seeded generator.
pub fn random_compact(seed: u64, size: usize, decay: f64) -> Result<WindowedMatrix> {
    if !(decay > 0.0 && decay < 1.0) {
        return Err(LabError::PreconditionViolated(format!(
            "decay must lie in (0, 1), got {decay}"
        )));
    }
    let mut rng = sampling::rng(seed);
    let mut a = WindowedMatrix::zeros(Grid::Unilateral, Window::square(1, size))?;
    for i in 1..=size as i64 {
        for j in 1..=size as i64 {
            let g = sampling::unit_disk(&mut rng);
            a.set(i, j, g * decay.powi(i.max(j) as i32));
        }
    }
    Ok(a)
}

/// Right inverses `S_n` offered to the criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RightInverseRule {
    /// `S_n y = scale^n op^n y`.
    ScaledPower { op: OperatorSpec, scale: Complex },
}

impl RightInverseRule {
    fn apply(&self, n: usize, y: &Vec2) -> Result<Vec2> {
        match self {
            RightInverseRule::ScaledPower { op, scale } => Ok(power(op, n, y)?.scale(scale.powu(n as u32))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Subsequence {
    /// `n_k = k`.
    Identity,
    /// `n_k = start + step (k - 1)`.
    Arithmetic { start: usize, step: usize },
}

impl Subsequence {
    pub fn at(&self, k: usize) -> usize {
        match self {
            Subsequence::Identity => k,
            Subsequence::Arithmetic { start, step } => start + step * (k - 1),
        }
    }
}

/// Finitely supported vectors standing in for the dense sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DenseSet {
    /// `e_1, ..., e_dim`.
    Basis,
    /// `count` random vectors supported in `1..=dim`.
    Random { seed: u64, count: usize },
}

impl DenseSet {
    fn vectors(&self, dim: usize) -> Vec<Vec2> {
        match self {
            DenseSet::Basis => (1..=dim as i64).map(Vec2::basis).collect(),
            DenseSet::Random { seed, count } => {
                let mut rng = sampling::rng(*seed);
                (0..*count)
                    .map(|_| sampling::random_vector(&mut rng, Grid::Unilateral, 1, dim))
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HCWitness {
    pub operator: OperatorSpec,
    pub right_maps: RightInverseRule,
    pub dense_set: DenseSet,
    pub subsequence: Subsequence,
}

impl HCWitness {
    /// `T = cB` with `S_n = c^{-n} S^n`, `n_k = k`.
    pub fn scaled_backward_shift(c: Complex, dense_set: DenseSet) -> Self {
        HCWitness {
            operator: OperatorSpec::scaled(c, OperatorSpec::backward_shift()),
            right_maps: RightInverseRule::ScaledPower {
                op: OperatorSpec::forward_shift(),
                scale: c.inv(),
            },
            dense_set,
            subsequence: Subsequence::Identity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCurve {
    pub name: String,
    /// Worst residual over the sampled vectors, one value per `k`.
    pub residuals: Vec<f64>,
    /// Nonincreasing from the largest residual onwards.
    pub eventually_nonincreasing: bool,
    /// Every residual is exactly zero.
    pub exact: bool,
    /// Final residual within tolerance and the curve eventually nonincreasing.
    pub holds: bool,
}

impl ConditionCurve {
    fn new(name: &str, residuals: Vec<f64>) -> Self {
        // last position of the maximum, so a plateau at the top still counts
        let peak = residuals
            .iter()
            .enumerate()
            .fold(0, |best, (k, &r)| if r >= residuals[best] { k } else { best });
        let eventually_nonincreasing = residuals[peak.min(residuals.len())..].windows(2).all(|w| w[1] <= w[0]);
        let exact = residuals.iter().all(|&r| r == 0.0);
        let last_ok = residuals.last().is_some_and(|&r| r <= HC_TOL);
        ConditionCurve {
            name: name.into(),
            residuals,
            eventually_nonincreasing,
            exact,
            holds: eventually_nonincreasing && last_ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HCReport {
    pub k_max: usize,
    pub dim: usize,
    pub samples: usize,
    pub n_k: Vec<usize>,
    /// `T^{n_k} x -> 0`, `S_{n_k} y -> 0`, `T^{n_k} S_{n_k} y -> y`.
    pub conditions: Vec<ConditionCurve>,
    pub holds: bool,
    pub failing: Vec<String>,
}

fn power(op: &OperatorSpec, n: usize, x: &Vec2) -> Result<Vec2> {
    let mut cur = x.clone();
    for _ in 0..n {
        if cur.is_zero() {
            break;
        }
        cur = op.apply(&cur)?;
    }
    Ok(cur)
}

/// Evaluates the three limit conditions for `k = 1..=k_max` on the dense-set
/// samples supported in `1..=dim`.
pub fn check_hc_criterion(w: &HCWitness, k_max: usize, dim: usize) -> Result<HCReport> {
    let samples = w.dense_set.vectors(dim);
    let n_k: Vec<usize> = (1..=k_max).map(|k| w.subsequence.at(k)).collect();
    let mut r1 = Vec::with_capacity(k_max);
    let mut r2 = Vec::with_capacity(k_max);
    let mut r3 = Vec::with_capacity(k_max);
    for &n in &n_k {
        let (mut a, mut b, mut c) = (0.0f64, 0.0f64, 0.0f64);
        for v in &samples {
            a = a.max(power(&w.operator, n, v)?.norm());
            let s = w.right_maps.apply(n, v)?;
            b = b.max(s.norm());
            c = c.max(power(&w.operator, n, &s)?.sub(v).norm());
        }
        r1.push(a);
        r2.push(b);
        r3.push(c);
    }
    let conditions = vec![
        ConditionCurve::new("T^n x -> 0", r1),
        ConditionCurve::new("S_n y -> 0", r2),
        ConditionCurve::new("T^n S_n y -> y", r3),
    ];
    let failing: Vec<String> = conditions.iter().filter(|c| !c.holds).map(|c| c.name.clone()).collect();
    Ok(HCReport {
        k_max,
        dim,
        samples: samples.len(),
        n_k,
        holds: failing.is_empty(),
        conditions,
        failing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropertyKind {
    Normal,
    HSAdjointPair,
    Paranormal,
    ParanormalViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: PropertyKind,
    pub samples: usize,
    pub max_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalCommutatorReport {
    pub seed: u64,
    /// `||N*N - NN*||_Op` on the window.
    pub normality_defect: f64,
    /// `<Delta_N X, Y>_2 = <X, Delta_{N*} Y>_2`, scaled by `||X||_2 ||Y||_2`.
    pub adjoint_pairing: PropertyReport,
    /// `Delta_N Delta_{N*} X = Delta_{N*} Delta_N X`, scaled by `||X||_2`.
    pub commutation: PropertyReport,
}

/// Runs the pairing and commutation checks on every matrix unit of the
/// `dim x dim` window and on `samples` random matrices.
pub fn check_normal_commutator(
    n: &OperatorSpec,
    dim: usize,
    samples: usize,
    seed: u64,
) -> Result<NormalCommutatorReport> {
    let grid = n.grid()?;
    let first = grid.first_index().unwrap_or(-(dim as i64) / 2);
    let window = Window::square(first, dim);
    let delta = ElementaryMap::commutator(n.clone());
    let delta_star = ElementaryMap::commutator(OperatorSpec::adjoint(n.clone()));
    let mut rng = sampling::rng(seed);

    let mut operands: Vec<WindowedMatrix> = Vec::new();
    for i in window.row_offset..window.row_end() {
        for j in window.col_offset..window.col_end() {
            operands.push(WindowedMatrix::unit_on(grid, i, j));
        }
    }
    for _ in 0..samples {
        operands.push(sampling::random_matrix(&mut rng, grid, window));
    }

    let mut pair_max = 0.0f64;
    let mut comm_max = 0.0f64;
    let mut comm_witness: Option<(usize, f64)> = None;
    for (idx, x) in operands.iter().enumerate() {
        let y = sampling::random_matrix(&mut rng, grid, window);
        let dx = apply_map(&delta, x)?;
        let lhs = crate::linalg::hs_inner(&dx, &y);
        let rhs = crate::linalg::hs_inner(x, &apply_map(&delta_star, &y)?);
        let xs = x.hs_norm_sq().sqrt();
        let scale = xs * y.hs_norm_sq().sqrt();
        pair_max = pair_max.max((lhs - rhs).norm() / scale);

        let a = apply_map(&delta, &apply_map(&delta_star, x)?)?;
        let b = apply_map(&delta_star, &dx)?;
        let r = norm(&(&a - &b), NormKind::HilbertSchmidt) / xs;
        if r > comm_max {
            comm_max = r;
            comm_witness = Some((idx, r));
        }
    }
    let defect = match n.finite_model() {
        Some(m) => crate::spectral::normality_defect(&m),
        None => {
            let m = n.materialize(window)?;
            crate::spectral::normality_defect(&m)
        }
    };
    let witness = comm_witness.map(|(idx, r)| {
        let x = &operands[idx];
        json!({ "operand": x, "relative_residual": r })
    });
    Ok(NormalCommutatorReport {
        seed,
        normality_defect: defect,
        adjoint_pairing: PropertyReport {
            property: PropertyKind::HSAdjointPair,
            samples: operands.len(),
            max_residual: pair_max,
            witness: None,
        },
        commutation: PropertyReport {
            property: PropertyKind::Normal,
            samples: operands.len(),
            max_residual: comm_max,
            witness,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParanormalCheck {
    pub holds: bool,
    /// `||T x||^2`.
    pub lhs: f64,
    /// `||T^2 x|| ||x||`.
    pub rhs: f64,
}

pub fn check_paranormal(t: &OperatorSpec, x: &Vec2) -> Result<ParanormalCheck> {
    if x.is_zero() {
        return Err(LabError::ZeroVector);
    }
    let tx = t.apply(x)?;
    let ttx = t.apply(&tx)?;
    let lhs = tx.norm().powi(2);
    let rhs = ttx.norm() * x.norm();
    Ok(ParanormalCheck {
        holds: lhs <= rhs + 1e-12,
        lhs,
        rhs,
    })
}

/// The forward shift on `{e_0, e_1, ...}` with `T e_0 = 0`, written on the
/// 1-based grid: label `k + 1` stands for `e_k`.
pub fn shift_killing_e0() -> OperatorSpec {
    // W e_j = w_j e_{j-1} with w_2 = 0; its adjoint sends label 1 to zero
    // and label i >= 2 to label i + 1.
    OperatorSpec::adjoint(OperatorSpec::weighted_backward_shift(SequenceRule::Finite {
        start: 1,
        values: vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
        tail: Complex::new(1.0, 0.0),
    }))
}

/// Coefficients relative to `e_0, e_1, ...` of a vector on the 1-based grid.
fn zero_based(v: &Vec2, len: usize) -> Vec<Complex> {
    (1..=len as i64).map(|i| v.get(i)).collect()
}

/// Searches for `u, v` with `T v = 0` and `||T*u||^2 > ||T*^2 u||`, then
/// checks that `Delta_T` violates the paranormal inequality at the rank-one
/// `S = <., u> v` in both the operator and Hilbert-Schmidt norms.
pub fn paranormal_counterexample(dim: usize) -> Result<PropertyReport> {
    if dim < 4 {
        return Err(LabError::PreconditionViolated(format!("dim must be >= 4, got {dim}")));
    }
    let t = shift_killing_e0();
    let t_star = OperatorSpec::adjoint(t.clone());

    let v = (1..=dim as i64)
        .map(Vec2::basis)
        .find(|e| t.apply(e).map(|y| y.is_zero()).unwrap_or(false))
        .ok_or_else(|| LabError::SearchFailure("no basis vector in the kernel of T".into()))?;

    // coefficient grid {0, 1, -1} on e_0..e_3, first strict maximum wins
    let levels = [0.0, 1.0, -1.0];
    let span = 4usize;
    let mut best: Option<(f64, Vec2)> = None;
    let mut candidates = 0usize;
    for code in 1..3usize.pow(span as u32) {
        let mut c = code;
        let mut entries = Vec::with_capacity(span);
        for _ in 0..span {
            entries.push(Complex::new(levels[c % 3], 0.0));
            c /= 3;
        }
        entries.reverse();
        let u = Vec2::new(1, entries)?;
        let u = u.scale(Complex::new(1.0 / u.norm(), 0.0));
        candidates += 1;
        let tu = t_star.apply(&u)?;
        let ttu = t_star.apply(&tu)?;
        let margin = tu.norm().powi(2) - ttu.norm();
        if margin > best.as_ref().map_or(0.0, |b| b.0) {
            best = Some((margin, u));
        }
    }
    let (search_margin, u) = best.ok_or_else(|| LabError::SearchFailure("no u with ||T*u||^2 > ||T*^2 u||".into()))?;

    let s = rank_one(&v, &u);
    let delta = ElementaryMap::commutator(t.clone());
    let d1 = apply_map(&delta, &s)?;
    let d2 = apply_map(&delta, &d1)?;
    let mut norms = serde_json::Map::new();
    let mut worst = f64::INFINITY;
    for kind in [NormKind::Operator, NormKind::HilbertSchmidt] {
        let lhs = norm(&d1, kind).powi(2);
        let rhs = norm(&d2, kind) * norm(&s, kind);
        worst = worst.min(lhs - rhs);
        norms.insert(
            match kind {
                NormKind::Operator => "operator",
                NormKind::HilbertSchmidt => "hilbert_schmidt",
                NormKind::Nuclear => "nuclear",
            }
            .into(),
            json!({ "lhs": lhs, "rhs": rhs, "margin": lhs - rhs }),
        );
    }
    if worst <= 0.0 {
        return Err(LabError::SearchFailure(format!(
            "witness margin {worst} is not positive"
        )));
    }
    Ok(PropertyReport {
        property: PropertyKind::ParanormalViolated,
        samples: candidates,
        max_residual: worst,
        witness: Some(json!({
            "u": zero_based(&u, span),
            "v": zero_based(&v, span),
            "t_star_u_sq": t_star.apply(&u)?.norm().powi(2),
            "t_star2_u": t_star.apply(&t_star.apply(&u)?)?.norm(),
            "search_margin": search_margin,
            "norms": norms,
        })),
    })
}
