mod common;

use common::{dense_product, re};
use commutant_core::linalg::{Complex, Grid, Vec2, Window, WindowedMatrix};
use commutant_core::operators::{OperatorSpec, SequenceRule};
use commutant_core::spectral::eigenvalues;

fn sample_specs() -> Vec<OperatorSpec> {
    let finite = WindowedMatrix::from_rows(
        2,
        1,
        vec![vec![re(1.0), re(0.0), Complex::i()], vec![re(0.0), re(-2.0), re(0.5)]],
    )
    .unwrap();
    vec![
        OperatorSpec::backward_shift(),
        OperatorSpec::forward_shift(),
        OperatorSpec::diagonal(SequenceRule::Reciprocal),
        OperatorSpec::diagonal(SequenceRule::Periodic {
            pattern: vec![re(0.5), re(0.7)],
        }),
        OperatorSpec::weighted_backward_shift(SequenceRule::Finite {
            start: 1,
            values: vec![re(3.0), re(0.0)],
            tail: re(2.0),
        }),
        OperatorSpec::poly_b(&[re(1.0), re(0.0), Complex::new(0.0, 2.0)]),
        OperatorSpec::poly_b(&[re(0.0), re(1.0), re(1.0)]),
        OperatorSpec::finite(finite.clone()),
        OperatorSpec::scaled(Complex::new(1.5, -0.5), OperatorSpec::backward_shift()),
        OperatorSpec::sum(
            OperatorSpec::identity(),
            OperatorSpec::scaled(re(0.3), OperatorSpec::backward_shift()),
        ),
        OperatorSpec::adjoint(OperatorSpec::poly_b(&[re(0.0), re(2.0), Complex::i()])),
        OperatorSpec::sum(OperatorSpec::finite(finite), OperatorSpec::forward_shift()),
    ]
}

/// Support bounds from the declared growth must contain the exact product
/// support for every matrix unit `E_ij`, `i, j <= 8`.
#[test]
fn growth_bounds_are_sound_on_matrix_units() {
    for spec in sample_specs() {
        let (l, r) = spec.growth().unwrap();
        for i in 1..=8 {
            for j in 1..=8 {
                let e = WindowedMatrix::unit(i, j);
                // window big enough to hold T E_ij and E_ij T exactly
                let big = Window::square(1, 16);
                let t = spec.materialize(big).unwrap();
                for (prod, g) in [(dense_product(&t, &e, 1, 17), l), (dense_product(&e, &t, 1, 17), r)] {
                    let s = prod.support();
                    if s.is_empty() {
                        continue;
                    }
                    assert!(s.row_end() - 1 <= i + g.row_delta, "{spec:?} rows {s:?} E({i},{j})");
                    assert!(s.col_end() - 1 <= j + g.col_delta, "{spec:?} cols {s:?} E({i},{j})");
                }
            }
        }
    }
}

#[test]
fn growth_values_by_brute_force() {
    // largest row/column shift observed over units, compared with the declared bound
    let observed = |spec: &OperatorSpec| {
        let t = spec.materialize(Window::square(1, 16)).unwrap();
        let (mut lr, mut rc) = (i64::MIN, i64::MIN);
        for i in 1..=6 {
            for j in 1..=6 {
                let e = WindowedMatrix::unit(i, j);
                let s = dense_product(&t, &e, 1, 17).support();
                if !s.is_empty() {
                    lr = lr.max(s.row_end() - 1 - i);
                }
                let s = dense_product(&e, &t, 1, 17).support();
                if !s.is_empty() {
                    rc = rc.max(s.col_end() - 1 - j);
                }
            }
        }
        (lr, rc)
    };
    assert_eq!(observed(&OperatorSpec::backward_shift()), (-1, 1));
    let (l, r) = OperatorSpec::backward_shift().growth().unwrap();
    assert_eq!((l.row_delta, l.col_delta, r.row_delta, r.col_delta), (-1, 0, 0, 1));
    let p = OperatorSpec::poly_b(&[re(0.0), re(1.0), re(1.0)]);
    assert_eq!(observed(&p).1, 2);
    assert_eq!(p.growth().unwrap().1.col_delta, 2);
}

#[test]
fn materialize_agrees_with_apply_on_interior_columns() {
    let window = Window::square(1, 10);
    for spec in sample_specs() {
        let m = spec.materialize_flagged(window).unwrap();
        for j in 1..=10 {
            if m.boundary_columns.contains(&j) {
                continue;
            }
            let col = m.matrix.column(j);
            let img = spec.apply(&Vec2::basis(j)).unwrap();
            assert_eq!(col.max_abs_diff(&img), 0.0, "{spec:?} column {j}");
        }
    }
}

#[test]
fn adjoint_materializes_to_conjugate_transpose() {
    let window = Window::square(1, 9);
    for spec in sample_specs() {
        let a = OperatorSpec::adjoint(spec.clone()).materialize(window).unwrap();
        let b = spec.materialize(window).unwrap().adjoint();
        assert!(a.same_operator(&b), "{spec:?}");
    }
}

#[test]
fn bilateral_shift_is_unitary_on_vectors() {
    let b = OperatorSpec::bilateral_backward_shift();
    let s = OperatorSpec::adjoint(b.clone());
    let x = Vec2::bilateral(-3, vec![re(1.0), Complex::i(), re(-2.0), re(0.5)]).unwrap();
    let y = s.apply(&b.apply(&x).unwrap()).unwrap();
    assert_eq!(y.max_abs_diff(&x), 0.0);
    assert_eq!(b.apply(&x).unwrap().norm(), x.norm());
}

#[test]
fn truncations_of_scaled_shift_stay_inside_the_disk() {
    // numerics from a truncation may only under-report the closed form
    let spec = OperatorSpec::scaled(re(2.0), OperatorSpec::backward_shift());
    let m = spec.materialize(Window::square(1, 24)).unwrap();
    for z in eigenvalues(&m).unwrap() {
        assert!(z.norm() <= 2.0 + 1e-8);
    }
    let perturbed = {
        let mut m = m.clone();
        m.set(24, 1, re(2.0));
        m
    };
    // closing the cycle puts the eigenvalues on the boundary circle
    for z in eigenvalues(&perturbed).unwrap() {
        assert!((z.norm() - 2.0).abs() < 1e-8, "{z}");
    }
}

#[test]
fn bilateral_grid_accepts_nonpositive_indices() {
    let d = OperatorSpec::Diagonal {
        grid: Grid::Bilateral,
        alphas: SequenceRule::Finite {
            start: -1,
            values: vec![re(5.0), re(6.0)],
            tail: re(1.0),
        },
    };
    let m = d.materialize(Window::square(-2, 4)).unwrap();
    assert_eq!(m.get(-2, -2), re(1.0));
    assert_eq!(m.get(-1, -1), re(5.0));
    assert_eq!(m.get(0, 0), re(6.0));
    assert_eq!(m.get(1, 1), re(1.0));
}
