//! Cluster validity indices.
//!
//! External indices (NMI, RI, ARI) compare a predicted partition with the
//! ground truth through their contingency table. Internal indices
//! (silhouette, Davies-Bouldin) use the geometry of the point matrix only.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::distance::{euclidean, row_slices, PairwiseDistances};
use crate::error::{Error, Result};

/// Two partitions of the same `n` points, relabeled to dense ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPair {
    predicted: Vec<usize>,
    truth: Vec<usize>,
    k_predicted: usize,
    k_truth: usize,
}

impl PartitionPair {
    pub fn new(predicted: &[usize], truth: &[usize]) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::LengthMismatch {
                left: predicted.len(),
                right: truth.len(),
            });
        }
        let (predicted, k_predicted) = densify(predicted);
        let (truth, k_truth) = densify(truth);
        Ok(PartitionPair {
            predicted,
            truth,
            k_predicted,
            k_truth,
        })
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    fn require_pairs(&self) -> Result<()> {
        if self.len() < 2 {
            Err(Error::TooFewRows {
                rows: self.len(),
                required: 2,
            })
        } else {
            Ok(())
        }
    }
}

/// Maps arbitrary ids to `0..k` in order of first appearance.
pub(crate) fn densify(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let dense = labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    (dense, map.len())
}

/// `cell[i][j]` counts points predicted `i` with true label `j`.
pub fn contingency(pair: &PartitionPair) -> Array2<u64> {
    let mut table = Array2::<u64>::zeros((pair.k_predicted, pair.k_truth));
    for (&p, &t) in pair.predicted.iter().zip(&pair.truth) {
        table[[p, t]] += 1;
    }
    table
}

fn comb2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

fn margins(table: &Array2<u64>) -> (Vec<u64>, Vec<u64>) {
    let rows = table.rows().into_iter().map(|r| r.sum()).collect();
    let cols = table.columns().into_iter().map(|c| c.sum()).collect();
    (rows, cols)
}

/// Pair agreement counts between the two partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    /// Pairs grouped together in both partitions.
    pub a: u64,
    /// Pairs separated in both partitions.
    pub b: u64,
    pub total_pairs: u64,
    /// Pairs together in the predicted partition.
    pub together_predicted: u64,
    /// Pairs together in the ground truth.
    pub together_truth: u64,
}

pub fn pair_counts(pair: &PartitionPair) -> Result<PairCounts> {
    pair.require_pairs()?;
    let table = contingency(pair);
    let (rows, cols) = margins(&table);
    let a: u64 = table.iter().map(|&c| comb2(c)).sum();
    let together_predicted: u64 = rows.iter().map(|&c| comb2(c)).sum();
    let together_truth: u64 = cols.iter().map(|&c| comb2(c)).sum();
    let total_pairs = comb2(pair.len() as u64);
    Ok(PairCounts {
        a,
        b: total_pairs + a - together_predicted - together_truth,
        total_pairs,
        together_predicted,
        together_truth,
    })
}

/// Fraction of point pairs on which the two partitions agree.
pub fn rand_index(pair: &PartitionPair) -> Result<f64> {
    let pc = pair_counts(pair)?;
    Ok(rand_index_from_counts(&pc))
}

pub fn rand_index_from_counts(pc: &PairCounts) -> f64 {
    (pc.a + pc.b) as f64 / pc.total_pairs as f64
}

/// Rand index corrected for chance under the permutation model.
pub fn adjusted_rand_index(pair: &PartitionPair) -> Result<f64> {
    let pc = pair_counts(pair)?;
    Ok(adjusted_rand_from_counts(&pc))
}

pub fn adjusted_rand_from_counts(pc: &PairCounts) -> f64 {
    // (index - expected) / (max_index - expected), scaled by 2 * total_pairs
    // so numerator and denominator are exact integers.
    let index = pc.a as i128;
    let rows = pc.together_predicted as i128;
    let cols = pc.together_truth as i128;
    let total = pc.total_pairs as i128;
    let numerator = 2 * (total * index - rows * cols);
    let denominator = total * (rows + cols) - 2 * rows * cols;
    if denominator == 0 {
        // only reachable when both partitions are trivial (all-one or all-singleton)
        if numerator == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        numerator as f64 / denominator as f64
    }
}

fn entropy(counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with the arithmetic-mean normalizer.
pub fn nmi(pair: &PartitionPair) -> f64 {
    if pair.is_empty() {
        return 1.0;
    }
    let table = contingency(pair);
    let (rows, cols) = margins(&table);
    let n = pair.len() as f64;
    let h_pred = entropy(&rows, n);
    let h_truth = entropy(&cols, n);
    if h_pred == 0.0 && h_truth == 0.0 {
        return 1.0;
    }
    let mut mi = 0.0;
    for ((i, j), &c) in table.indexed_iter() {
        if c == 0 {
            continue;
        }
        let c = c as f64;
        mi += c / n * ((n * c) / (rows[i] as f64 * cols[j] as f64)).ln();
    }
    if mi <= 0.0 {
        return 0.0;
    }
    (mi / (0.5 * (h_pred + h_truth))).clamp(0.0, 1.0)
}

fn present_clusters(assignments: &[usize]) -> (Vec<usize>, usize) {
    densify(assignments)
}

/// Mean silhouette coefficient over all points.
pub fn silhouette(matrix: &Array2<f64>, assignments: &[usize]) -> Result<f64> {
    check_geometry(matrix, assignments)?;
    let owned;
    let matrix = if matrix.is_standard_layout() {
        matrix
    } else {
        owned = matrix.as_standard_layout().into_owned();
        &owned
    };
    let rows = row_slices(matrix);
    silhouette_with(assignments, |i, j| euclidean(rows[i], rows[j]))
}

/// Silhouette from precomputed pairwise distances.
pub fn silhouette_precomputed(distances: &PairwiseDistances, assignments: &[usize]) -> Result<f64> {
    if distances.len() != assignments.len() {
        return Err(Error::LengthMismatch {
            left: distances.len(),
            right: assignments.len(),
        });
    }
    if assignments.len() < 2 {
        return Err(Error::TooFewRows {
            rows: assignments.len(),
            required: 2,
        });
    }
    silhouette_with(assignments, |i, j| distances.get(i, j))
}

fn silhouette_with(assignments: &[usize], dist: impl Fn(usize, usize) -> f64) -> Result<f64> {
    let (labels, k) = present_clusters(assignments);
    if k < 2 {
        return Err(Error::TooFewClusters { found: k });
    }
    let n = labels.len();
    let mut sizes = vec![0usize; k];
    labels.iter().for_each(|&l| sizes[l] += 1);

    let mut sums = vec![0.0; k];
    let mut total = 0.0;
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            sums[labels[j]] += dist(i, j);
        }
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        let d_w = sums[own] / (sizes[own] - 1) as f64;
        let d_n = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = d_w.max(d_n);
        if denom > 0.0 {
            total += (d_n - d_w) / denom;
        }
    }
    Ok(total / n as f64)
}

/// Per-cluster scatter and centroid separation behind the Davies-Bouldin index.
#[derive(Debug, Clone, PartialEq)]
pub struct DaviesBouldinTerms {
    pub delta: Vec<f64>,
    pub centroid_distance: Array2<f64>,
}

pub fn davies_bouldin_terms(matrix: &Array2<f64>, assignments: &[usize]) -> Result<DaviesBouldinTerms> {
    check_geometry(matrix, assignments)?;
    let (labels, k) = present_clusters(assignments);
    if k < 2 {
        return Err(Error::TooFewClusters { found: k });
    }
    let d = matrix.ncols();
    let mut centroids = Array2::<f64>::zeros((k, d));
    let mut sizes = vec![0usize; k];
    for (row, &l) in matrix.rows().into_iter().zip(&labels) {
        let mut c = centroids.row_mut(l);
        c += &row;
        sizes[l] += 1;
    }
    for (mut c, &s) in centroids.rows_mut().into_iter().zip(&sizes) {
        c /= s as f64;
    }
    let cent_rows: Vec<Vec<f64>> = centroids.rows().into_iter().map(|r| r.to_vec()).collect();

    let mut delta = vec![0.0; k];
    for (row, &l) in matrix.rows().into_iter().zip(&labels) {
        let row = row.to_vec();
        delta[l] += euclidean(&row, &cent_rows[l]);
    }
    delta.iter_mut().zip(&sizes).for_each(|(s, &n)| *s /= n as f64);

    let mut centroid_distance = Array2::<f64>::zeros((k, k));
    for i in 0..k {
        for j in (i + 1)..k {
            let dist = euclidean(&cent_rows[i], &cent_rows[j]);
            centroid_distance[[i, j]] = dist;
            centroid_distance[[j, i]] = dist;
        }
    }
    Ok(DaviesBouldinTerms {
        delta,
        centroid_distance,
    })
}

/// Davies-Bouldin index. Coincident centroids of two distinct clusters
/// give `+inf`.
pub fn davies_bouldin(matrix: &Array2<f64>, assignments: &[usize]) -> Result<f64> {
    let terms = davies_bouldin_terms(matrix, assignments)?;
    Ok(davies_bouldin_from_terms(&terms))
}

pub fn davies_bouldin_from_terms(terms: &DaviesBouldinTerms) -> f64 {
    let k = terms.delta.len();
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in 0..k {
            if i == j {
                continue;
            }
            let spread = terms.delta[i] + terms.delta[j];
            let sep = terms.centroid_distance[[i, j]];
            let r = if sep > 0.0 { spread / sep } else { f64::INFINITY };
            worst = worst.max(r);
        }
        total += worst;
    }
    total / k as f64
}

fn check_geometry(matrix: &Array2<f64>, assignments: &[usize]) -> Result<()> {
    if matrix.nrows() != assignments.len() {
        return Err(Error::LengthMismatch {
            left: matrix.nrows(),
            right: assignments.len(),
        });
    }
    if assignments.len() < 2 {
        return Err(Error::TooFewRows {
            rows: assignments.len(),
            required: 2,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Nmi,
    Ri,
    Ari,
    Silhouette,
    DaviesBouldin,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Nmi,
        Metric::Ri,
        Metric::Ari,
        Metric::Silhouette,
        Metric::DaviesBouldin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Nmi => "nmi",
            Metric::Ri => "ri",
            Metric::Ari => "ari",
            Metric::Silhouette => "silhouette",
            Metric::DaviesBouldin => "davies_bouldin",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Nmi => "NMI",
            Metric::Ri => "Rand index",
            Metric::Ari => "ARI",
            Metric::Silhouette => "Silhouette",
            Metric::DaviesBouldin => "Davies-Bouldin",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

/// The five indices for one clustering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub nmi: f64,
    pub ri: f64,
    pub ari: f64,
    pub silhouette: f64,
    pub davies_bouldin: f64,
}

impl MetricReport {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Nmi => self.nmi,
            Metric::Ri => self.ri,
            Metric::Ari => self.ari,
            Metric::Silhouette => self.silhouette,
            Metric::DaviesBouldin => self.davies_bouldin,
        }
    }

    /// Evaluates all five indices; `distances` may be supplied when the same
    /// matrix is scored repeatedly.
    pub fn evaluate(
        matrix: &Array2<f64>,
        assignments: &[usize],
        truth: &[usize],
        distances: Option<&PairwiseDistances>,
    ) -> Result<Self> {
        let pair = PartitionPair::new(assignments, truth)?;
        let pc = pair_counts(&pair)?;
        let silhouette = match distances {
            Some(d) => silhouette_precomputed(d, assignments)?,
            None => silhouette(matrix, assignments)?,
        };
        Ok(MetricReport {
            nmi: nmi(&pair),
            ri: rand_index_from_counts(&pc),
            ari: adjusted_rand_from_counts(&pc),
            silhouette,
            davies_bouldin: davies_bouldin(matrix, assignments)?,
        })
    }
}
