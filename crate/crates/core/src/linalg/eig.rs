//! Eigenvalues of small dense complex matrices: Householder reduction to
//! upper Hessenberg form followed by Wilkinson-shifted QR sweeps with
//! Givens rotations and bottom-up deflation.

#![allow(clippy::needless_range_loop)]

use super::Complex;
use crate::{LabError, Result};

const ZERO: Complex = Complex::new(0.0, 0.0);
const ITERS_PER_EIGENVALUE: usize = 60;

/// All eigenvalues (with multiplicity) of the row-major `n x n` matrix,
/// sorted lexicographically by `(re, im)`.
pub fn eigenvalues_dense(n: usize, data: &[Complex]) -> Result<Vec<Complex>> {
    assert_eq!(data.len(), n * n);
    let mut h: Vec<Vec<Complex>> = (0..n).map(|i| data[i * n..(i + 1) * n].to_vec()).collect();
    hessenberg(&mut h);
    let mut out = shifted_qr(&mut h)?;
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

fn hessenberg(h: &mut [Vec<Complex>]) {
    let n = h.len();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex> = (k + 1..n).map(|i| h[i][k]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0] == ZERO {
            Complex::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // left: rows k+1.., H <- (I - 2 v v^*) H
        for j in k..n {
            let dot: Complex = v.iter().enumerate().map(|(t, vt)| vt.conj() * h[k + 1 + t][j]).sum();
            for (t, vt) in v.iter().enumerate() {
                h[k + 1 + t][j] -= 2.0 * vt * dot;
            }
        }
        // right: columns k+1.., H <- H (I - 2 v v^*)
        for row in h.iter_mut() {
            let dot: Complex = v.iter().enumerate().map(|(t, vt)| row[k + 1 + t] * vt).sum();
            for (t, vt) in v.iter().enumerate() {
                row[k + 1 + t] -= 2.0 * dot * vt.conj();
            }
        }
        for row in h.iter_mut().skip(k + 2) {
            row[k] = ZERO;
        }
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex, b: Complex) -> (f64, Complex) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let rho = an.hypot(bn);
    (an / rho, (a / an) * b.conj() / rho)
}

fn wilkinson_shift(a: Complex, b: Complex, c: Complex, d: Complex) -> Complex {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

fn shifted_qr(h: &mut [Vec<Complex>]) -> Result<Vec<Complex>> {
    let n = h.len();
    let mut eigs = Vec::with_capacity(n);
    if n == 0 {
        return Ok(eigs);
    }
    let budget = ITERS_PER_EIGENVALUE * n.max(1);
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut since_deflation = 0usize;
    loop {
        // find the start of the unreduced trailing block
        let mut lo = hi;
        while lo > 0 {
            let sub = h[lo][lo - 1].norm();
            let scale = h[lo][lo].norm() + h[lo - 1][lo - 1].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if sub <= f64::EPSILON * scale {
                h[lo][lo - 1] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eigs.push(h[hi][hi]);
            since_deflation = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > budget {
            return Err(LabError::ConvergenceFailure(total));
        }
        let mu = if since_deflation.is_multiple_of(11) {
            // exceptional shift to break cycles
            h[hi][hi] + Complex::new(h[hi][hi - 1].norm() * 0.75, h[hi][hi - 1].norm() * 0.25)
        } else {
            wilkinson_shift(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        };
        qr_step(h, lo, hi, mu);
    }
    Ok(eigs)
}

/// One explicit shifted QR step on the active block `lo..=hi`.
fn qr_step(h: &mut [Vec<Complex>], lo: usize, hi: usize, mu: Complex) {
    for k in lo..=hi {
        h[k][k] -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[k][k], h[k + 1][k]);
        for j in k..=hi {
            let x = h[k][j];
            let y = h[k + 1][j];
            h[k][j] = x * c + s * y;
            h[k + 1][j] = -s.conj() * x + y * c;
        }
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + offset;
        for row in h.iter_mut().take((k + 2).min(hi) + 1).skip(lo) {
            let x = row[k];
            let y = row[k + 1];
            row[k] = x * c + y * s.conj();
            row[k + 1] = -x * s + y * c;
        }
    }
    for k in lo..=hi {
        h[k][k] += mu;
    }
}
