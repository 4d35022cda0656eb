//! Labeled baseline datasets: synthetic generation, text I/O and summary
//! statistics.
//!
//! The on-disk layout is two plain-text files. The data file holds one
//! point per line with features separated by spaces or tabs; the label file
//! holds one integer per line, aligned with the data file.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::seeding;

/// A point matrix together with its ground-truth partition.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    points: Array2<f64>,
    labels: Vec<usize>,
    n_clusters: usize,
    name: String,
}

impl LabeledDataset {
    /// Validates and wraps a matrix and label vector.
    ///
    /// Labels must already be dense in `[0, n_clusters)` with every id used.
    pub fn new(name: impl Into<String>, points: Array2<f64>, labels: Vec<usize>, n_clusters: usize) -> Result<Self> {
        if labels.len() != points.nrows() {
            return Err(Error::LengthMismatch {
                left: points.nrows(),
                right: labels.len(),
            });
        }
        if n_clusters == 0 {
            return Err(Error::InvalidArgument("n_clusters must be positive".into()));
        }
        let mut seen = vec![false; n_clusters];
        for (i, &l) in labels.iter().enumerate() {
            if l >= n_clusters {
                return Err(Error::InvalidArgument(format!(
                    "label {l} at row {i} outside [0, {n_clusters})"
                )));
            }
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("cluster id {missing} has no members")));
        }
        if let Some(((row, col), _)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        let points = if points.is_standard_layout() {
            points
        } else {
            points.as_standard_layout().into_owned()
        };
        Ok(LabeledDataset {
            points,
            labels,
            n_clusters,
            name: name.into(),
        })
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_points(&self) -> usize {
        self.points.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.points.ncols()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Pooled and per-feature location/spread of a point matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub mu: f64,
    pub sigma: f64,
    pub per_feature_mu: Vec<f64>,
    pub per_feature_sigma: Vec<f64>,
}

/// Builds a Dimsets-style dataset of isotropic unit-variance Gaussian blobs.
///
/// Along every axis the cluster centers occupy a random permutation of the
/// grid positions `0, s, 2s, ..., (k-1)s` (with `s = separation`), each
/// jittered by `Uniform(-0.1 s, 0.1 s)`. Any two centers therefore differ by
/// at least `0.8 s` in every single coordinate. Rows are ordered by cluster.
pub fn generate_dim_like(
    d: usize,
    n_clusters: usize,
    points_per_cluster: usize,
    separation: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if d == 0 || n_clusters == 0 || points_per_cluster == 0 {
        return Err(Error::InvalidArgument(format!(
            "dimensions, clusters and points per cluster must be positive (got {d}, {n_clusters}, {points_per_cluster})"
        )));
    }
    if !(separation.is_finite() && separation > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "separation must be a positive finite number, got {separation}"
        )));
    }

    let mut rng = seeding::rng_from_seed(seed);
    let jitter = 0.1 * separation;
    let mut centers = Array2::<f64>::zeros((n_clusters, d));
    let mut slots: Vec<usize> = (0..n_clusters).collect();
    for axis in 0..d {
        slots.shuffle(&mut rng);
        for (c, &slot) in slots.iter().enumerate() {
            centers[[c, axis]] = slot as f64 * separation + rng.random_range(-jitter..jitter);
        }
    }

    let n = n_clusters * points_per_cluster;
    let mut points = Array2::<f64>::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    for c in 0..n_clusters {
        for p in 0..points_per_cluster {
            let row = c * points_per_cluster + p;
            for axis in 0..d {
                let z: f64 = rng.sample(StandardNormal);
                points[[row, axis]] = centers[[c, axis]] + z;
            }
            labels.push(c);
        }
    }
    LabeledDataset::new(format!("dim-{d}"), points, labels, n_clusters)
}

/// Global (pooled) and column-wise mean and population standard deviation.
pub fn compute_stats(data: &LabeledDataset) -> Result<DatasetStats> {
    matrix_stats(data.points())
}

pub(crate) fn matrix_stats(points: &Array2<f64>) -> Result<DatasetStats> {
    let (rows, cols) = points.dim();
    if rows < 2 {
        return Err(Error::TooFewRows { rows, required: 2 });
    }
    let count = (rows * cols) as f64;
    let mu = points.iter().sum::<f64>() / count;
    let sigma = (points.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / count).sqrt();

    let per_feature_mu: Array1<f64> = points.mean_axis(Axis(0)).unwrap_or_default();
    let per_feature_sigma = points.std_axis(Axis(0), 0.0);
    Ok(DatasetStats {
        mu,
        sigma,
        per_feature_mu: per_feature_mu.to_vec(),
        per_feature_sigma: per_feature_sigma.to_vec(),
    })
}

/// Reads a dataset from a data file and an aligned label file.
///
/// Labels are remapped to `[0, k)` in order of first appearance.
pub fn load_dataset(data_path: &Path, labels_path: &Path) -> Result<LabeledDataset> {
    let data = fs::read_to_string(data_path).map_err(|e| Error::io(format!("reading {}", data_path.display()), e))?;
    let labels =
        fs::read_to_string(labels_path).map_err(|e| Error::io(format!("reading {}", labels_path.display()), e))?;
    let name = data_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    parse_dataset(&name, &data, data_path, &labels, labels_path)
}

/// Parses the two text payloads; the paths are only used in diagnostics.
pub fn parse_dataset(
    name: &str,
    data: &str,
    data_path: &Path,
    labels: &str,
    labels_path: &Path,
) -> Result<LabeledDataset> {
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0usize;
    for (idx, line) in data.lines().enumerate() {
        let line_no = idx + 1;
        let before = values.len();
        for token in line.split([' ', '\t']).filter(|t| !t.is_empty()) {
            let v: f64 = token.parse().map_err(|_| Error::Parse {
                path: data_path.to_path_buf(),
                line: line_no,
                message: format!("non-numeric token `{token}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: data_path.to_path_buf(),
                    line: line_no,
                    message: format!("non-finite value `{token}`"),
                });
            }
            values.push(v);
        }
        let found = values.len() - before;
        match width {
            None if found == 0 => {
                return Err(Error::Parse {
                    path: data_path.to_path_buf(),
                    line: line_no,
                    message: "empty line".into(),
                })
            }
            None => width = Some(found),
            Some(w) if w != found => {
                return Err(Error::Parse {
                    path: data_path.to_path_buf(),
                    line: line_no,
                    message: format!("ragged row: expected {w} values, found {found}"),
                })
            }
            Some(_) => {}
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| Error::Format {
        path: data_path.to_path_buf(),
        message: "empty file".into(),
    })?;

    let mut remap: HashMap<i64, usize> = HashMap::new();
    let mut dense = Vec::with_capacity(rows);
    for (idx, line) in labels.lines().enumerate() {
        let line_no = idx + 1;
        let token = line.trim();
        let raw: i64 = token.parse().map_err(|_| Error::Parse {
            path: labels_path.to_path_buf(),
            line: line_no,
            message: format!("expected one integer label, found `{token}`"),
        })?;
        let next = remap.len();
        dense.push(*remap.entry(raw).or_insert(next));
    }
    if dense.is_empty() {
        return Err(Error::Format {
            path: labels_path.to_path_buf(),
            message: "empty file".into(),
        });
    }
    if dense.len() != rows {
        return Err(Error::Parse {
            path: labels_path.to_path_buf(),
            line: dense.len().min(rows) + 1,
            message: format!("line count mismatch: {} labels for {rows} data rows", dense.len()),
        });
    }

    let points = Array2::from_shape_vec((rows, width), values).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    LabeledDataset::new(name, points, dense, remap.len())
}

/// Serializes the point matrix, one row per line, shortest round-trip decimal.
pub fn format_points(points: &Array2<f64>) -> String {
    let mut out = String::with_capacity(points.len() * 20);
    for row in points.rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{v}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}

pub fn format_labels(labels: &[usize]) -> String {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        writeln!(out, "{l}").expect("writing to a String cannot fail");
    }
    out
}

pub fn write_dataset(data: &LabeledDataset, data_path: &Path, labels_path: &Path) -> Result<()> {
    fs::write(data_path, format_points(data.points()))
        .map_err(|e| Error::io(format!("writing {}", data_path.display()), e))?;
    fs::write(labels_path, format_labels(data.labels()))
        .map_err(|e| Error::io(format!("writing {}", labels_path.display()), e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::path::PathBuf;

    fn parse(data: &str, labels: &str) -> Result<LabeledDataset> {
        parse_dataset(
            "t",
            data,
            &PathBuf::from("data.txt"),
            labels,
            &PathBuf::from("labels.txt"),
        )
    }

    #[test]
    fn generates_dimsets_shape() {
        let ds = generate_dim_like(32, 16, 64, 10.0, 7).unwrap();
        assert_eq!(ds.n_points(), 1024);
        assert_eq!(ds.n_features(), 32);
        assert_eq!(ds.n_clusters(), 16);
        for c in 0..16 {
            assert_eq!(ds.labels().iter().filter(|&&l| l == c).count(), 64);
        }
    }

    #[test]
    fn single_cluster_generation() {
        let ds = generate_dim_like(1, 1, 5, 10.0, 0).unwrap();
        assert_eq!(ds.n_points(), 5);
        assert!(ds.labels().iter().all(|&l| l == 0));
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_dim_like(8, 4, 10, 10.0, 3).unwrap();
        let b = generate_dim_like(8, 4, 10, 10.0, 3).unwrap();
        assert_eq!(a, b);
        let c = generate_dim_like(8, 4, 10, 10.0, 4).unwrap();
        assert_ne!(a.points(), c.points());
    }

    #[test]
    fn generator_separates_centers_on_every_axis() {
        let ds = generate_dim_like(6, 5, 400, 10.0, 11).unwrap();
        let means: Vec<Vec<f64>> = (0..5)
            .map(|c| {
                let rows: Vec<usize> = (0..ds.n_points()).filter(|&i| ds.labels()[i] == c).collect();
                (0..6)
                    .map(|j| rows.iter().map(|&i| ds.points()[[i, j]]).sum::<f64>() / rows.len() as f64)
                    .collect()
            })
            .collect();
        for a in 0..5 {
            for b in (a + 1)..5 {
                for j in 0..6 {
                    // 0.8 s minus generous sampling slack on the blob means
                    assert!((means[a][j] - means[b][j]).abs() > 7.5);
                }
            }
        }
    }

    #[test]
    fn generator_rejects_bad_arguments() {
        assert!(generate_dim_like(0, 2, 2, 1.0, 0).is_err());
        assert!(generate_dim_like(2, 0, 2, 1.0, 0).is_err());
        assert!(generate_dim_like(2, 2, 0, 1.0, 0).is_err());
        assert!(generate_dim_like(2, 2, 2, 0.0, 0).is_err());
        assert!(generate_dim_like(2, 2, 2, -3.0, 0).is_err());
    }

    #[test]
    fn parses_smallest_input_and_remaps_labels() {
        let ds = parse("0 0\n1 1", "1\n2").unwrap();
        assert_eq!(ds.points(), &array![[0.0, 0.0], [1.0, 1.0]]);
        assert_eq!(ds.labels(), &[0, 1]);
        assert_eq!(ds.n_clusters(), 2);

        let ds = parse("1\n2\n3\n4", "7\n-2\n7\n5").unwrap();
        assert_eq!(ds.labels(), &[0, 1, 0, 2]);
    }

    #[test]
    fn accepts_tabs_runs_of_spaces_and_scientific_notation() {
        let ds = parse("1e3\t 2.5\n-4E-2  0", "0\n0").unwrap();
        assert_eq!(ds.points(), &array![[1000.0, 2.5], [-0.04, 0.0]]);
    }

    #[test]
    fn ragged_row_names_line() {
        let err = parse("1 2 3\n4 5", "0\n1").unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("ragged"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs_are_rejected_with_line_numbers() {
        assert!(matches!(parse("1 x", "0"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("1\n2\n3", "0\n1"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse("1\n2", "0\nfoo"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("", "0"), Err(Error::Format { .. })));
        assert!(matches!(parse("1", ""), Err(Error::Format { .. })));
    }

    #[test]
    fn stats_of_trivial_matrices() {
        let ds = LabeledDataset::new("t", array![[0.0], [2.0]], vec![0, 0], 1).unwrap();
        let s = compute_stats(&ds).unwrap();
        assert_eq!((s.mu, s.sigma), (1.0, 1.0));

        let ds = LabeledDataset::new("t", array![[1.0, 1.0], [1.0, 1.0]], vec![0, 0], 1).unwrap();
        let s = compute_stats(&ds).unwrap();
        assert_eq!((s.mu, s.sigma), (1.0, 0.0));
        assert_eq!(s.per_feature_sigma, vec![0.0, 0.0]);
    }

    #[test]
    fn stats_need_two_rows() {
        let ds = LabeledDataset::new("t", array![[1.0, 2.0]], vec![0], 1).unwrap();
        assert!(matches!(compute_stats(&ds), Err(Error::TooFewRows { .. })));
    }

    #[test]
    fn generated_feature_sigma_matches_direct_columns() {
        let ds = generate_dim_like(32, 16, 64, 10.0, 7).unwrap();
        let s = compute_stats(&ds).unwrap();
        let n = ds.n_points() as f64;
        for j in 0..32 {
            let col = ds.points().column(j);
            let m = col.sum() / n;
            let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            assert!((s.per_feature_mu[j] - m).abs() < 1e-9);
            assert!((s.per_feature_sigma[j] - sd).abs() < 1e-9);
        }
        // within-cluster spread is unit variance
        let resid: Vec<f64> = (0..ds.n_points())
            .map(|i| {
                let c = ds.labels()[i];
                let members = (c * 64)..(c * 64 + 64);
                let mean = members.clone().map(|r| ds.points()[[r, 0]]).sum::<f64>() / 64.0;
                ds.points()[[i, 0]] - mean
            })
            .collect();
        let var = resid.iter().map(|r| r * r).sum::<f64>() / resid.len() as f64;
        assert!((var - 1.0).abs() < 0.15, "within-cluster variance {var}");
    }

    #[test]
    fn invariants_enforced_on_construction() {
        assert!(LabeledDataset::new("t", array![[1.0]], vec![0, 1], 2).is_err());
        assert!(LabeledDataset::new("t", array![[1.0], [2.0]], vec![0, 2], 2).is_err());
        assert!(LabeledDataset::new("t", array![[1.0], [2.0]], vec![0, 0], 2).is_err());
        assert!(LabeledDataset::new("t", array![[f64::NAN], [2.0]], vec![0, 0], 1).is_err());
    }
}
