mod common;

use common::re;
use commutant_core::dynamics::{
    check_hc_criterion, check_normal_commutator, check_paranormal, paranormal_counterexample, random_compact,
    shift_killing_e0, DenseSet, HCWitness, RightInverseRule, Subsequence,
};
use commutant_core::linalg::{norm, Complex, NormKind, Vec2, Window, WindowedMatrix};
use commutant_core::maps::{apply_map, proj_corner, ElementaryMap};
use commutant_core::operators::{OperatorSpec, SequenceRule};
use proptest::prelude::*;

fn permutation(n: usize, shift: usize) -> WindowedMatrix {
    let mut rows = vec![vec![re(0.0); n]; n];
    for i in 0..n {
        rows[(i + shift) % n][i] = re(1.0);
    }
    WindowedMatrix::from_rows(1, 1, rows).unwrap()
}

proptest! {
    #[test]
    fn right_inverse_of_scaled_shift_is_exact(
        entries in prop::collection::vec((-8i32..=8, -8i32..=8), 1..12),
        n in 0usize..30,
    ) {
        let y = Vec2::new(1, entries.iter().map(|&(a, b)| Complex::new(a as f64 / 8.0, b as f64 / 8.0)).collect()).unwrap();
        let t = OperatorSpec::scaled(re(2.0), OperatorSpec::backward_shift());
        let s = OperatorSpec::forward_shift();
        let mut x = y.clone();
        for _ in 0..n {
            x = s.apply(&x).unwrap();
        }
        x = x.scale(re(0.5f64.powi(n as i32)));
        for _ in 0..n {
            x = t.apply(&x).unwrap();
        }
        prop_assert_eq!(x.max_abs_diff(&y), 0.0);
    }

    #[test]
    fn matrix_units_are_eigenvectors_of_diagonal_commutators(
        alphas in prop::collection::vec((-8i32..=8, -8i32..=8), 2..6),
        i in 1i64..6,
        j in 1i64..6,
    ) {
        let alphas: Vec<Complex> = alphas.iter().map(|&(a, b)| Complex::new(a as f64 / 4.0, b as f64 / 4.0)).collect();
        let n = alphas.len() as i64;
        prop_assume!(i <= n && j <= n);
        let d = OperatorSpec::diagonal(SequenceRule::Finite { start: 1, values: alphas.clone(), tail: re(0.0) });
        let out = apply_map(&ElementaryMap::commutator(d), &WindowedMatrix::unit(i, j)).unwrap();
        let lambda = alphas[(i - 1) as usize] - alphas[(j - 1) as usize];
        prop_assert!(out.same_operator(&WindowedMatrix::unit(i, j).scale(lambda)));
    }
}

#[test]
fn criterion_on_random_vectors() {
    let w = HCWitness::scaled_backward_shift(re(2.0), DenseSet::Random { seed: 5, count: 20 });
    let r = check_hc_criterion(&w, 48, 8).unwrap();
    assert!(r.holds, "{:?}", r.failing);
    assert!(r.conditions[2].exact);
    assert!(r.conditions[0].residuals[8..].iter().all(|&x| x == 0.0));
}

#[test]
fn criterion_with_arithmetic_subsequence() {
    let mut w = HCWitness::scaled_backward_shift(Complex::new(0.0, 2.0), DenseSet::Basis);
    w.subsequence = Subsequence::Arithmetic { start: 2, step: 3 };
    let r = check_hc_criterion(&w, 15, 5).unwrap();
    assert_eq!(&r.n_k[..3], &[2, 5, 8]);
    assert!(r.holds, "{:?}", r.failing);
}

#[test]
fn criterion_for_a_contractive_diagonal_reports_the_failing_condition() {
    let half = OperatorSpec::diagonal(SequenceRule::constant(re(0.5)));
    let w = HCWitness {
        operator: half.clone(),
        right_maps: RightInverseRule::ScaledPower {
            op: OperatorSpec::diagonal(SequenceRule::constant(re(2.0))),
            scale: re(1.0),
        },
        dense_set: DenseSet::Basis,
        subsequence: Subsequence::Identity,
    };
    let r = check_hc_criterion(&w, 40, 4).unwrap();
    assert!(r.conditions[0].holds);
    assert!(r.conditions[2].holds);
    assert_eq!(r.failing, vec!["S_n y -> 0".to_string()]);

    let w = HCWitness {
        operator: half,
        right_maps: RightInverseRule::ScaledPower {
            op: OperatorSpec::forward_shift(),
            scale: re(0.5),
        },
        dense_set: DenseSet::Basis,
        subsequence: Subsequence::Identity,
    };
    let r = check_hc_criterion(&w, 40, 4).unwrap();
    assert_eq!(r.failing, vec!["T^n S_n y -> y".to_string()]);
}

#[test]
fn normal_suite_examples() {
    let d = WindowedMatrix::diag(1, &[re(1.0), Complex::i(), re(-1.0)]);
    let r = check_normal_commutator(&OperatorSpec::finite(d), 3, 10, 1).unwrap();
    assert!(r.commutation.max_residual <= 1e-12);
    assert!(r.adjoint_pairing.max_residual <= 1e-10);

    let r = check_normal_commutator(&OperatorSpec::finite(permutation(4, 1)), 4, 10, 2).unwrap();
    assert!(r.commutation.max_residual <= 1e-10);

    let jordan = WindowedMatrix::from_rows(1, 1, vec![vec![re(0.0), re(1.0)], vec![re(0.0), re(0.0)]]).unwrap();
    let r = check_normal_commutator(&OperatorSpec::finite(jordan), 2, 10, 3).unwrap();
    assert!(r.commutation.max_residual >= 0.1);
    assert!(r.normality_defect > 0.5);
    // the pairing identity holds whether or not the operator is normal
    assert!(r.adjoint_pairing.max_residual <= 1e-10);
}

#[test]
fn jordan_block_residual_on_a_unit() {
    // hand computation: for J = E12 and X = E12, Delta_J Delta_J* X - Delta_J* Delta_J X = 2 E12
    let j = OperatorSpec::finite(WindowedMatrix::unit(1, 2));
    let dj = ElementaryMap::commutator(j.clone());
    let djs = ElementaryMap::commutator(OperatorSpec::adjoint(j));
    let x = WindowedMatrix::unit(1, 2);
    let a = apply_map(&dj, &apply_map(&djs, &x).unwrap()).unwrap();
    let b = apply_map(&djs, &apply_map(&dj, &x).unwrap()).unwrap();
    assert!((&a - &b).same_operator(&WindowedMatrix::unit(1, 2).scale(re(2.0))));
}

#[test]
fn paranormal_inequality_for_a_two_valued_diagonal() {
    let d = OperatorSpec::diagonal(SequenceRule::Finite {
        start: 1,
        values: vec![re(2.0), re(1.0)],
        tail: re(0.0),
    });
    let x = Vec2::new(1, vec![re(1.0), re(1.0)]).unwrap();
    let r = check_paranormal(&d, &x).unwrap();
    // ||Dx||^2 = 4 + 1, ||D^2 x|| ||x|| = sqrt(17) sqrt(2)
    assert!((r.lhs - 5.0).abs() < 1e-14);
    assert!((r.rhs - 34f64.sqrt()).abs() < 1e-14);
    assert!(r.holds);
}

#[test]
fn shift_killing_e0_is_paranormal_on_samples() {
    let t = shift_killing_e0();
    let mut rng = commutant_core::sampling::rng(11);
    for _ in 0..200 {
        let x = commutant_core::sampling::random_vector(&mut rng, Default::default(), 1, 8);
        assert!(check_paranormal(&t, &x).unwrap().holds);
    }
}

#[test]
fn paranormal_counterexample_golden_witness() {
    let r = paranormal_counterexample(6).unwrap();
    let w = r.witness.unwrap();
    let u: Vec<Complex> = serde_json::from_value(w["u"].clone()).unwrap();
    let v: Vec<Complex> = serde_json::from_value(w["v"].clone()).unwrap();
    assert_eq!(u, vec![re(0.0), re(0.0), re(1.0), re(0.0)]);
    assert_eq!(v, vec![re(1.0), re(0.0), re(0.0), re(0.0)]);
    for key in ["operator", "hilbert_schmidt"] {
        let n = &w["norms"][key];
        assert_eq!(n["lhs"].as_f64().unwrap(), 1.0);
        assert_eq!(n["rhs"].as_f64().unwrap(), 0.0);
        assert!(n["margin"].as_f64().unwrap() >= 1e-6);
    }
    assert!(paranormal_counterexample(3).is_err());
}

#[test]
fn brute_force_margin_search_matches_the_library() {
    // independent scan: T* acts on 0-based coordinates as u_k -> u_{k+1} for k >= 1,
    // killing e_0 and e_1
    let t_star = |u: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        out[1..u.len() - 1].copy_from_slice(&u[2..]);
        out
    };
    let nrm = |u: &[f64]| u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut best = (0.0, vec![]);
    for code in 1..81usize {
        let mut c = code;
        let mut u = vec![0.0; 4];
        for k in (0..4).rev() {
            u[k] = [0.0, 1.0, -1.0][c % 3];
            c /= 3;
        }
        let s = nrm(&u);
        let u: Vec<f64> = u.iter().map(|x| x / s).collect();
        let mut padded = u.clone();
        padded.extend([0.0, 0.0]);
        let a = t_star(&padded);
        let b = t_star(&a);
        let margin = nrm(&a).powi(2) - nrm(&b);
        if margin > best.0 {
            best = (margin, u);
        }
    }
    assert_eq!(best.0, 1.0);
    assert_eq!(best.1, vec![0.0, 0.0, 1.0, 0.0]);
}

#[test]
fn corpus_tail_bound() {
    for seed in 0..10 {
        let a = random_compact(seed, 16, 0.5).unwrap();
        let tail = norm(&(&a - &proj_corner(&a, 8)), NormKind::Operator);
        assert!(tail <= 16.0 * 0.5f64.powi(9), "{tail}");
        assert_eq!(a.window(), Window::square(1, 16));
    }
}
