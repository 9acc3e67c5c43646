//! Seeded fixtures shared by the benchmarks.

use mlood_core::{Matrix, Rng};
use rand::Rng as _;

/// `rows x cols` matrix with entries uniform in `[lo, hi)`.
pub fn uniform(rows: usize, cols: usize, lo: f64, hi: f64, seed: u64) -> Matrix {
    let mut rng = Rng::new(seed);
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

/// Scores of two overlapping populations, for metric benchmarks.
pub fn score_pair(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = Rng::new(seed);
    let a = (0..n).map(|_| rng.random::<f64>() + 0.3).collect();
    let b = (0..n).map(|_| rng.random::<f64>()).collect();
    (a, b)
}
