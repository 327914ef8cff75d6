//! Singular values by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns are rotated pairwise until every pair is numerically orthogonal,
//! `|<a_p, a_q>| <= tol * |a_p| |a_q|`; the singular values are then the
//! column norms. Only values are produced, no singular vectors.

use super::Complex;

const PAIR_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// Singular values of the row-major `rows x cols` matrix, sorted decreasing.
/// The result has `min(rows, cols)` entries.
pub fn singular_values_dense(rows: usize, cols: usize, data: &[Complex]) -> Vec<f64> {
    assert_eq!(data.len(), rows * cols);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    // Work on whichever orientation has fewer columns; A and A^* share
    // singular values.
    let mut columns: Vec<Vec<Complex>> = if cols <= rows {
        (0..cols)
            .map(|j| (0..rows).map(|i| data[i * cols + j]).collect())
            .collect()
    } else {
        (0..rows)
            .map(|i| (0..cols).map(|j| data[i * cols + j].conj()).collect())
            .collect()
    };
    jacobi_orthogonalize(&mut columns);
    let mut sv: Vec<f64> = columns.iter().map(|c| sq_norm(c).sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn sq_norm(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn jacobi_orthogonalize(columns: &mut [Vec<Complex>]) {
    let n = columns.len();
    let mut norms: Vec<f64> = columns.iter().map(|c| sq_norm(c)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: Complex = columns[p].iter().zip(&columns[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= PAIR_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Remove the phase of gamma from column q, then rotate in the
                // real plane.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = columns.split_at_mut(q);
                let cp = &mut left[p];
                let cq = &mut right[0];
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let yq = *y * phase.conj();
                    let xp = *x;
                    *x = xp * c - yq * s;
                    *y = xp * s + yq * c;
                }
                norms[p] = sq_norm(cp);
                norms[q] = sq_norm(cq);
            }
        }
        if !rotated {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex {
        Complex::new(x, 0.0)
    }

    #[test]
    fn diagonal_matrix() {
        let d = [re(3.0), re(0.0), re(0.0), re(-4.0)];
        let sv = singular_values_dense(2, 2, &d);
        assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn wide_and_tall_agree() {
        // [[1, 2, 0], [0, 1, 1i]] and its transpose
        let a = [re(1.0), re(2.0), re(0.0), re(0.0), re(1.0), Complex::i()];
        let at = [re(1.0), re(0.0), re(2.0), re(1.0), re(0.0), Complex::i()];
        let s1 = singular_values_dense(2, 3, &a);
        let s2 = singular_values_dense(3, 2, &at);
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() < 1e-13);
        }
        // squared singular values sum to the Frobenius mass 7
        let mass: f64 = s1.iter().map(|s| s * s).sum();
        assert!((mass - 7.0).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[1, 1], [0, 1]]: singular values are the golden ratio and its inverse.
        let a = [re(1.0), re(1.0), re(0.0), re(1.0)];
        let sv = singular_values_dense(2, 2, &a);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((sv[0] - phi).abs() < 1e-14);
        assert!((sv[1] - 1.0 / phi).abs() < 1e-14);
    }
}
