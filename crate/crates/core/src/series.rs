//! Diagonals of a matrix as polynomial coefficient lists, and the transforms
//! `tau_j : f(z) -> (1 - z^j) f(z)`.

use serde::{Deserialize, Serialize};

use crate::linalg::{Complex, WindowedMatrix};
use crate::{LabError, Result};

/// `sum_{r=1}^{L} b_r z^{r-1}` stored as `[b_1, ..., b_L]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoeffSeries {
    pub coeffs: Vec<Complex>,
}

impl CoeffSeries {
    pub fn new(coeffs: Vec<Complex>) -> Self {
        CoeffSeries { coeffs }
    }

    pub fn from_reals(xs: &[f64]) -> Self {
        Self::new(xs.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `b_r` for `r >= 1`; zero past the end.
    pub fn coeff(&self, r: usize) -> Complex {
        if r >= 1 && r <= self.coeffs.len() {
            self.coeffs[r - 1]
        } else {
            Complex::new(0.0, 0.0)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficientwise difference, padding the shorter with zeros.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.len().max(other.len());
        (1..=n)
            .map(|r| (self.coeff(r) - other.coeff(r)).norm())
            .fold(0.0, f64::max)
    }
}

/// `f_k`: the entries `a_{k+r, r}` for `r = 1..=length`.
pub fn diag_series(a: &WindowedMatrix, k: i64, length: usize) -> CoeffSeries {
    CoeffSeries::new((1..=length as i64).map(|r| a.get(k + r, r)).collect())
}

/// Main diagonal `a_{r, r}` for `r = 1..=length`.
pub fn main_diagonal(a: &WindowedMatrix, length: usize) -> CoeffSeries {
    diag_series(a, 0, length)
}

/// Multiplication by `1 - z^j`: the first `j` coefficients are kept and
/// `b_r - b_{r-j}` follows; the output is `j` longer so nothing is cut.
pub fn tau(s: &CoeffSeries, j: usize) -> CoeffSeries {
    assert!(j >= 1, "tau needs j >= 1");
    let len = s.len() + j;
    CoeffSeries::new(
        (1..=len)
            .map(|r| {
                if r <= j {
                    s.coeff(r)
                } else {
                    s.coeff(r) - s.coeff(r - j)
                }
            })
            .collect(),
    )
}

/// `tau_j` applied `n` times.
pub fn tau_power(s: &CoeffSeries, j: usize, n: usize) -> CoeffSeries {
    let mut out = s.clone();
    for _ in 0..n {
        out = tau(&out, j);
    }
    out
}

/// Horner evaluation; only defined inside the unit disk.
pub fn eval(s: &CoeffSeries, z: Complex) -> Result<Complex> {
    if z.norm() >= 1.0 || !z.norm().is_finite() {
        return Err(LabError::DomainError(z.norm()));
    }
    Ok(s.coeffs.iter().rev().fold(Complex::new(0.0, 0.0), |acc, b| acc * z + b))
}
