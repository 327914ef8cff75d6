//! Property suites behind `verify`. Each suite compares library output with
//! a direct computation and reports its worst residual (or, for the
//! counterexample, its smallest margin).

use commutant_core::dynamics::{
    check_hc_criterion, check_normal_commutator, paranormal_counterexample, DenseSet, HCWitness,
};
use commutant_core::linalg::{Complex, Grid, Window, WindowedMatrix};
use commutant_core::maps::{apply_map, superoperator_matrix, ElementaryMap};
use commutant_core::operators::{OperatorSpec, SequenceRule};
use commutant_core::sampling::{self, LabRng};
use commutant_core::series::{tau_power, CoeffSeries};
use commutant_core::spectral::{eigenvalues, verdict_commutator, Conclusion, Rule};
use rand::Rng;
use serde::Serialize;

use crate::{emit, exit, to_json_text, Failure, Suite, VerifyArgs};

#[derive(Debug, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub checks: usize,
    /// "max residual" (must stay below the threshold) or "min margin"
    /// (must stay above it).
    pub measure: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

fn residual(suite: &'static str, checks: usize, value: f64, threshold: f64) -> SuiteResult {
    SuiteResult {
        suite,
        checks,
        measure: "max residual",
        value,
        threshold,
        passed: value <= threshold,
        detail: String::new(),
    }
}

fn re(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

fn matr(seed: u64, dim: usize) -> Result<SuiteResult, Failure> {
    let mut rng = sampling::rng(seed);
    let delta = ElementaryMap::commutator(OperatorSpec::backward_shift());
    let reach = dim as i64 + 2;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = sampling::random_matrix(&mut rng, Grid::Unilateral, Window::square(1, dim));
        let out = apply_map(&delta, &a)?;
        for i in 1..=reach {
            for j in 1..=reach {
                let left = a.get(i + 1, j);
                let right = if j >= 2 { a.get(i, j - 1) } else { re(0.0) };
                worst = worst.max((out.get(i, j) - (left - right)).norm());
            }
        }
    }
    Ok(residual("matr", 100, worst, 1e-12))
}

/// Coefficients of `(1 - z^j)^n`.
fn binomial_factor(j: usize, n: usize) -> Vec<i64> {
    let mut out = vec![0i64; j * n + 1];
    let mut binom = 1i64;
    for k in 0..=n {
        out[j * k] = if k % 2 == 0 { binom } else { -binom };
        binom = binom * (n - k) as i64 / (k + 1) as i64;
    }
    out
}

fn tau(seed: u64) -> SuiteResult {
    let mut rng = sampling::rng(seed);
    let mut worst = 0.0f64;
    let mut checks = 0;
    for _ in 0..20 {
        let len = rng.random_range(1..=32usize);
        let ints: Vec<i64> = (0..len).map(|_| rng.random_range(-50..=50i64)).collect();
        let s = CoeffSeries::from_reals(&ints.iter().map(|&x| x as f64).collect::<Vec<_>>());
        for j in 1..=4 {
            for n in 0..=8 {
                let f = binomial_factor(j, n);
                let mut want = vec![0i64; len + f.len() - 1];
                for (p, x) in ints.iter().enumerate() {
                    for (q, y) in f.iter().enumerate() {
                        want[p + q] += x * y;
                    }
                }
                let got = tau_power(&s, j, n);
                if got.len() != want.len() {
                    worst = f64::INFINITY;
                }
                for (r, w) in want.iter().enumerate() {
                    worst = worst.max((got.coeff(r + 1) - re(*w as f64)).norm());
                }
                checks += 1;
            }
        }
    }
    residual("tau", checks, worst, 0.0)
}

fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex) -> WindowedMatrix {
    let rows = (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect();
    WindowedMatrix::from_rows(1, 1, rows).expect("offsets are positive")
}

/// Five normal matrices: a diagonal, a permutation, a circulant, a
/// Hermitian and a skew-Hermitian matrix.
fn normal_family(rng: &mut LabRng) -> Vec<(&'static str, WindowedMatrix)> {
    let circ: Vec<Complex> = (0..5).map(|_| sampling::unit_disk(rng)).collect();
    let g: Vec<Complex> = (0..16).map(|_| sampling::unit_disk(rng)).collect();
    vec![
        (
            "diag(1, i, -1)",
            WindowedMatrix::diag(1, &[re(1.0), Complex::i(), re(-1.0)]),
        ),
        (
            "cyclic permutation",
            from_fn(4, |i, j| if i == (j + 1) % 4 { re(1.0) } else { re(0.0) }),
        ),
        ("circulant", from_fn(5, |i, j| circ[(i + 5 - j) % 5])),
        ("hermitian", from_fn(4, |i, j| g[i * 4 + j] + g[j * 4 + i].conj())),
        ("skew-hermitian", from_fn(4, |i, j| g[i * 4 + j] - g[j * 4 + i].conj())),
    ]
}

fn normal(seed: u64, dim: usize) -> Result<SuiteResult, Failure> {
    let mut rng = sampling::rng(seed);
    let mut worst = 0.0f64;
    let mut checks = 0;
    for (_, m) in normal_family(&mut rng) {
        let r = check_normal_commutator(&OperatorSpec::finite(m), dim, 10, seed)?;
        worst = worst.max(r.commutation.max_residual);
        checks += r.commutation.samples;
    }
    let jordan = from_fn(2, |i, j| if i == 0 && j == 1 { re(1.0) } else { re(0.0) });
    let control = check_normal_commutator(&OperatorSpec::finite(jordan), 2, 10, seed)?
        .commutation
        .max_residual;
    let mut out = residual("normal", checks, worst, 1e-10);
    out.passed &= control >= 0.1;
    out.detail = format!("jordan control residual {control:.3e} (needs >= 0.1)");
    Ok(out)
}

fn paranormal() -> Result<SuiteResult, Failure> {
    let r = paranormal_counterexample(6)?;
    let w = r.witness.clone().unwrap_or_default();
    let golden_u = serde_json::json!([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]);
    let golden_v = serde_json::json!([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]);
    let golden = w["u"] == golden_u && w["v"] == golden_v;
    Ok(SuiteResult {
        suite: "paranormal",
        checks: r.samples,
        measure: "min margin",
        value: r.max_residual,
        threshold: 1e-6,
        passed: golden && r.max_residual >= 1e-6,
        detail: if golden {
            "witness u = e_2, v = e_0".into()
        } else {
            format!("witness differs from u = e_2, v = e_0: {w}")
        },
    })
}

fn hc(seed: u64) -> Result<SuiteResult, Failure> {
    let w = HCWitness::scaled_backward_shift(re(2.0), DenseSet::Random { seed, count: 20 });
    let r = check_hc_criterion(&w, 48, 8)?;
    let third = &r.conditions[2];
    let worst = third.residuals.iter().copied().fold(0.0, f64::max);
    let control = check_hc_criterion(
        &HCWitness::scaled_backward_shift(re(1.0), DenseSet::Random { seed, count: 20 }),
        48,
        8,
    )?;
    let mut out = residual("hc", r.samples * r.n_k.len(), worst, 0.0);
    out.passed &= r.holds && third.exact && control.failing == ["S_n y -> 0"];
    out.detail = format!("c = 2 failing {:?}; c = 1 failing {:?}", r.failing, control.failing);
    Ok(out)
}

fn spectral(seed: u64) -> Result<SuiteResult, Failure> {
    let mut rng = sampling::rng(seed);
    let alphas: Vec<Complex> = (0..4).map(|_| sampling::unit_disk(&mut rng)).collect();
    let d = OperatorSpec::finite(WindowedMatrix::diag(1, &alphas));
    let m = superoperator_matrix(&ElementaryMap::commutator(d), Grid::Unilateral, Window::square(1, 4))?;
    let eigs = eigenvalues(&m)?;
    let mut want: Vec<Complex> = alphas.iter().flat_map(|a| alphas.iter().map(move |b| a - b)).collect();
    // greedy nearest matching as multisets
    let mut worst = 0.0f64;
    for z in &eigs {
        let k = (0..want.len())
            .min_by(|&a, &b| (want[a] - z).norm().total_cmp(&(want[b] - z).norm()))
            .expect("sizes agree");
        worst = worst.max((want[k] - z).norm());
        want.swap_remove(k);
    }
    if !want.is_empty() {
        worst = f64::INFINITY;
    }

    let two_valued = OperatorSpec::diagonal(SequenceRule::Periodic {
        pattern: vec![re(0.5), re(0.7)],
    });
    let cycle = from_fn(4, |i, j| if i == (j + 1) % 4 { re(1.0) } else { re(0.0) });
    let nilpotent = OperatorSpec::backward_shift().materialize(Window::square(1, 3))?;
    let unipotent = OperatorSpec::sum(OperatorSpec::identity(), OperatorSpec::finite(nilpotent));
    let verdicts = [
        (two_valued, Conclusion::NotHypercyclic, Rule::RieszSpectrum),
        (
            OperatorSpec::finite(cycle),
            Conclusion::NotSupercyclic,
            Rule::NormalCommutator,
        ),
        (unipotent, Conclusion::NotHypercyclic, Rule::RieszSpectrum),
    ];
    let mut bad = Vec::new();
    for (t, conclusion, rule) in &verdicts {
        let v = verdict_commutator(t);
        if v.conclusion != *conclusion || v.rule != Some(*rule) {
            bad.push(format!("{:?}/{:?}", v.conclusion, v.rule));
        }
    }
    let mut out = residual("spectral", eigs.len() + verdicts.len(), worst, 1e-8);
    out.passed &= bad.is_empty();
    if !bad.is_empty() {
        out.detail = format!("unexpected verdicts: {}", bad.join(", "));
    }
    Ok(out)
}

pub fn run_suite(suite: Suite, seed: u64, dim: usize) -> Result<Vec<SuiteResult>, Failure> {
    let all = suite == Suite::All;
    let mut out = Vec::new();
    if all || suite == Suite::Matr {
        out.push(matr(seed, dim)?);
    }
    if all || suite == Suite::Tau {
        out.push(tau(seed));
    }
    if all || suite == Suite::Normal {
        out.push(normal(seed, dim)?);
    }
    if all || suite == Suite::Paranormal {
        out.push(paranormal()?);
    }
    if all || suite == Suite::Hc {
        out.push(hc(seed)?);
    }
    if all || suite == Suite::Spectral {
        out.push(spectral(seed)?);
    }
    Ok(out)
}

pub fn verify(args: &VerifyArgs) -> Result<u8, Failure> {
    if args.dim == 0 {
        return Err(Failure::Usage("--dim must be positive".into()));
    }
    let results = run_suite(args.suite, args.seed, args.dim)?;
    println!(
        "{:<11} {:>7}  {:<12} {:>11}  {:>9}  status",
        "suite", "checks", "measure", "value", "threshold"
    );
    for r in &results {
        println!(
            "{:<11} {:>7}  {:<12} {:>11.3e}  {:>9.0e}  {}{}",
            r.suite,
            r.checks,
            r.measure,
            r.value,
            r.threshold,
            if r.passed { "PASS" } else { "FAIL" },
            if r.detail.is_empty() {
                String::new()
            } else {
                format!("  ({})", r.detail)
            }
        );
    }
    if let Some(path) = &args.out {
        emit(Some(path), &to_json_text(&results))?;
    }
    Ok(if results.iter().all(|r| r.passed) {
        exit::OK
    } else {
        exit::FAILED
    })
}
