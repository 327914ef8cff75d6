#![allow(dead_code)]

use commutant_core::linalg::{Complex, Grid, Window, WindowedMatrix};
use commutant_core::sampling;

pub fn re(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

/// Dense random matrix on `1..=n` with entries in the unit disk.
pub fn random_square(seed: u64, n: usize) -> WindowedMatrix {
    let mut rng = sampling::rng(seed);
    sampling::random_matrix(&mut rng, Grid::Unilateral, Window::square(1, n))
}

/// Naive dense product over explicit index ranges, used as an oracle.
pub fn dense_product(a: &WindowedMatrix, b: &WindowedMatrix, lo: i64, hi: i64) -> WindowedMatrix {
    let n = (hi - lo) as usize;
    let mut out = WindowedMatrix::zeros(a.grid(), Window::square(lo, n)).unwrap();
    for i in lo..hi {
        for j in lo..hi {
            let mut acc = re(0.0);
            for l in lo..hi {
                acc += a.get(i, l) * b.get(l, j);
            }
            out.set(i, j, acc);
        }
    }
    out
}
