//! Seeded pseudo-random sampling.
//!
//! All corpora use xoshiro256++ seeded through SplitMix64 (`seed_from_u64`),
//! so a seed reproduces the same bits on every platform.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::linalg::{Complex, Grid, Vec2, Window, WindowedMatrix};

pub type LabRng = Xoshiro256PlusPlus;

pub fn rng(seed: u64) -> LabRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Uniform sample from the closed unit disk.
pub fn unit_disk(rng: &mut LabRng) -> Complex {
    let r = rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    Complex::from_polar(r, theta)
}

/// Dense matrix over `window` with entries uniform in the unit disk.
pub fn random_matrix(rng: &mut LabRng, grid: Grid, window: Window) -> WindowedMatrix {
    let mut m = WindowedMatrix::zeros(grid, window).expect("valid sampling window");
    for i in window.row_offset..window.row_end() {
        for j in window.col_offset..window.col_end() {
            m.set(i, j, unit_disk(rng));
        }
    }
    m
}

/// Vector `sum_{k < len} g_k e_{offset + k}` with entries in the unit disk.
pub fn random_vector(rng: &mut LabRng, grid: Grid, offset: i64, len: usize) -> Vec2 {
    let entries = (0..len).map(|_| unit_disk(rng)).collect();
    Vec2::checked(grid, offset, entries).expect("valid sampling offset")
}
