//! Fixtures shared by the criterion benches.

use cluster_sense::perturb::{append_noise, NoiseKind, NoiseSpec};
use cluster_sense::{compute_stats, generate_dim_like, LabeledDataset};
use ndarray::Array2;

/// Dimsets-shaped baseline (16 clusters of 64 points).
pub fn baseline(dims: usize) -> LabeledDataset {
    generate_dim_like(dims, 16, 64, 10.0, 7).expect("valid generator arguments")
}

/// Baseline with `ratio * dims` Gaussian noise columns appended.
pub fn noisy(dims: usize, ratio: usize) -> (Array2<f64>, Vec<usize>) {
    let base = baseline(dims);
    let stats = compute_stats(&base).expect("1024 rows");
    let spec = NoiseSpec::from_stats(NoiseKind::Gaussian, &stats, 11).expect("finite stats");
    let aug = append_noise(&base, &spec, ratio * dims).expect("gaussian noise cannot fail");
    (aug.matrix(), base.labels().to_vec())
}
