//! k-means with k-means++ seeding and Lloyd iterations (Euclidean).

use ndarray::{Array2, Axis};
use rand::Rng;

use crate::distance::{row_slices, squared_euclidean};
use crate::error::{Error, Result};
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iterations: usize,
    /// Convergence threshold on the total squared centroid shift, as a
    /// fraction of the mean per-feature variance of the input.
    pub tolerance: f64,
    pub seed: u64,
    /// Candidates per center in greedy k-means++ seeding; 1 is plain k-means++.
    pub local_trials: usize,
    /// Independent seedings per fit; the lowest-inertia result is kept.
    pub n_init: usize,
}

impl KMeansConfig {
    pub const DEFAULT_MAX_ITERATIONS: usize = 300;
    pub const DEFAULT_TOLERANCE: f64 = 1e-4;

    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig {
            k,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            tolerance: Self::DEFAULT_TOLERANCE,
            seed,
            local_trials: default_local_trials(k),
            n_init: 1,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        if self.n_init == 0 {
            return Err(Error::InvalidArgument("n_init must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be positive".into()));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be finite and non-negative, got {}",
                self.tolerance
            )));
        }
        if n == 0 {
            return Err(Error::TooFewRows { rows: 0, required: 1 });
        }
        if self.k > n {
            return Err(Error::TooManyClusters { k: self.k, n });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub assignments: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia: f64,
    /// Number of centroid updates performed.
    pub iterations: usize,
    pub converged: bool,
    /// Inertia after every assignment step, final assignment included.
    pub inertia_history: Vec<f64>,
}

/// Candidates drawn per center by greedy k-means++: `2 + floor(ln k)`.
pub fn default_local_trials(k: usize) -> usize {
    2 + (k.max(1) as f64).ln().floor() as usize
}

/// Row indices chosen by k-means++ seeding with one D²-sampled candidate per
/// center (the classic scheme).
///
/// Points already covered by a chosen center have zero weight, so the
/// selected rows are always pairwise distinct.
pub fn kmeanspp_indices<R: Rng + ?Sized>(matrix: &Array2<f64>, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    greedy_kmeanspp_indices(matrix, k, 1, rng)
}

/// Greedy k-means++: each step draws `trials` candidates with probability
/// proportional to their squared distance to the nearest chosen center and
/// keeps the one that minimizes the resulting potential. `trials == 1` is
/// plain k-means++.
pub fn greedy_kmeanspp_indices<R: Rng + ?Sized>(
    matrix: &Array2<f64>,
    k: usize,
    trials: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = matrix.nrows();
    if n == 0 {
        return Err(Error::TooFewRows { rows: 0, required: 1 });
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let trials = trials.max(1);
    let matrix = matrix.as_standard_layout();
    let rows = row_slices_view(&matrix);

    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut nearest: Vec<f64> = rows.iter().map(|r| squared_euclidean(r, rows[chosen[0]])).collect();
    let mut candidate_nearest = vec![0.0; n];
    let mut best_nearest = vec![0.0; n];

    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InsufficientDistinctPoints {
                k,
                distinct: chosen.len(),
            });
        }
        let mut best: Option<(usize, f64)> = None;
        for _ in 0..trials {
            let candidate = sample_weighted(&nearest, total, rng);
            let mut potential = 0.0;
            for ((slot, r), &d) in candidate_nearest.iter_mut().zip(&rows).zip(&nearest) {
                *slot = d.min(squared_euclidean(r, rows[candidate]));
                potential += *slot;
            }
            if best.is_none_or(|(_, p)| potential < p) {
                best = Some((candidate, potential));
                best_nearest.copy_from_slice(&candidate_nearest);
            }
        }
        let (pick, _) = best.expect("at least one trial");
        chosen.push(pick);
        nearest.copy_from_slice(&best_nearest);
    }
    Ok(chosen)
}

/// Index drawn with probability `weights[i] / total`; zero weights are never drawn.
fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut pick = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
    }
    // rounding can leave `acc` just below `target`; the last positive weight is used then
    pick.expect("total > 0 implies a positive weight")
}

fn row_slices_view<'a>(m: &'a ndarray::CowArray<'_, f64, ndarray::Ix2>) -> Vec<&'a [f64]> {
    let cols = m.ncols();
    let flat = m.as_slice().expect("standard layout");
    if cols == 0 {
        vec![&[][..]; m.nrows()]
    } else {
        flat.chunks_exact(cols).collect()
    }
}

/// k-means++ initial centers (`k × D`).
pub fn kmeanspp_init<R: Rng + ?Sized>(matrix: &Array2<f64>, k: usize, rng: &mut R) -> Result<Array2<f64>> {
    let idx = kmeanspp_indices(matrix, k, rng)?;
    Ok(matrix.select(Axis(0), &idx))
}

/// Runs greedy k-means++ seeding from `config.seed`, then Lloyd iterations.
/// With `n_init > 1` the seedings share one random stream and the result with
/// the lowest inertia wins (earliest on ties).
pub fn fit(matrix: &Array2<f64>, config: &KMeansConfig) -> Result<ClusteringResult> {
    config.validate(matrix.nrows())?;
    let mut rng = seeding::rng_from_seed(config.seed);
    let mut best: Option<ClusteringResult> = None;
    for _ in 0..config.n_init {
        let idx = greedy_kmeanspp_indices(matrix, config.k, config.local_trials, &mut rng)?;
        let result = fit_from_centers(matrix, config, matrix.select(Axis(0), &idx))?;
        if best.as_ref().is_none_or(|b| result.inertia < b.inertia) {
            best = Some(result);
        }
    }
    Ok(best.expect("n_init >= 1"))
}

/// Lloyd iterations from the given rows as initial centers.
pub fn fit_from_indices(matrix: &Array2<f64>, config: &KMeansConfig, indices: &[usize]) -> Result<ClusteringResult> {
    if indices.len() != config.k || indices.iter().any(|&i| i >= matrix.nrows()) {
        return Err(Error::InvalidArgument(format!(
            "need {} valid initial row indices",
            config.k
        )));
    }
    fit_from_centers(matrix, config, matrix.select(Axis(0), indices))
}

/// Lloyd iterations from explicit initial centers.
pub fn fit_from_centers(matrix: &Array2<f64>, config: &KMeansConfig, initial: Array2<f64>) -> Result<ClusteringResult> {
    let (n, d) = matrix.dim();
    config.validate(n)?;
    if initial.dim() != (config.k, d) {
        return Err(Error::InvalidArgument(format!(
            "initial centers have shape {:?}, expected ({}, {d})",
            initial.dim(),
            config.k
        )));
    }
    let owned;
    let matrix = if matrix.is_standard_layout() {
        matrix
    } else {
        owned = matrix.as_standard_layout().into_owned();
        &owned
    };
    let rows = row_slices(matrix);
    let k = config.k;
    let threshold = config.tolerance * mean_feature_variance(matrix);

    let mut centroids: Vec<f64> = initial.as_standard_layout().iter().copied().collect();
    let mut next = vec![0.0; k * d];
    let mut assignments = vec![usize::MAX; n];
    let mut sq_dist = vec![0.0; n];
    let mut counts = vec![0usize; k];
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..config.max_iterations {
        let (changed, inertia) = assign(&rows, &centroids, d, &mut assignments, &mut sq_dist);
        history.push(inertia);
        if iterations > 0 && !changed {
            converged = true;
            break;
        }

        counts.iter_mut().for_each(|c| *c = 0);
        for &a in &assignments {
            counts[a] += 1;
        }
        repair_empty(&mut assignments, &mut counts, &mut sq_dist);
        update_means(&rows, &assignments, &counts, d, &mut next);

        let shift: f64 = centroids
            .chunks_exact(d.max(1))
            .zip(next.chunks_exact(d.max(1)))
            .map(|(a, b)| squared_euclidean(a, b))
            .sum();
        std::mem::swap(&mut centroids, &mut next);
        iterations += 1;
        if shift <= threshold {
            converged = true;
            break;
        }
    }

    let (_, inertia) = assign(&rows, &centroids, d, &mut assignments, &mut sq_dist);
    history.push(inertia);
    Ok(ClusteringResult {
        assignments,
        centroids: Array2::from_shape_vec((k, d), centroids).expect("k * d centroid buffer"),
        inertia,
        iterations,
        converged,
        inertia_history: history,
    })
}

fn mean_feature_variance(matrix: &Array2<f64>) -> f64 {
    if matrix.ncols() == 0 || matrix.nrows() == 0 {
        return 0.0;
    }
    matrix.var_axis(Axis(0), 0.0).mean().unwrap_or(0.0)
}

/// Nearest-centroid assignment; ties go to the lower centroid index.
fn assign(rows: &[&[f64]], centroids: &[f64], d: usize, assignments: &mut [usize], sq_dist: &mut [f64]) -> (bool, f64) {
    let mut changed = false;
    let mut inertia = 0.0;
    for (i, row) in rows.iter().enumerate() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, centroid) in centroids.chunks_exact(d.max(1)).enumerate() {
            let dist = if d == 0 { 0.0 } else { squared_euclidean(row, centroid) };
            if dist < best_d {
                best_d = dist;
                best = c;
            }
        }
        if assignments[i] != best {
            assignments[i] = best;
            changed = true;
        }
        sq_dist[i] = best_d;
        inertia += best_d;
    }
    (changed, inertia)
}

/// Moves the points farthest from their centroids into empty clusters.
fn repair_empty(assignments: &mut [usize], counts: &mut [usize], sq_dist: &mut [f64]) {
    let empty: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] == 0).collect();
    if empty.is_empty() {
        return;
    }
    let mut order: Vec<usize> = (0..assignments.len()).collect();
    order.sort_by(|&a, &b| sq_dist[b].total_cmp(&sq_dist[a]).then(a.cmp(&b)));
    let mut donors = order.into_iter();
    for cluster in empty {
        for p in donors.by_ref() {
            let from = assignments[p];
            if counts[from] > 1 {
                counts[from] -= 1;
                counts[cluster] = 1;
                assignments[p] = cluster;
                sq_dist[p] = 0.0;
                break;
            }
        }
    }
}

fn update_means(rows: &[&[f64]], assignments: &[usize], counts: &[usize], d: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (row, &a) in rows.iter().zip(assignments) {
        let dst = &mut out[a * d..(a + 1) * d];
        for (o, v) in dst.iter_mut().zip(row.iter()) {
            *o += v;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            let inv = 1.0 / count as f64;
            out[c * d..(c + 1) * d].iter_mut().for_each(|v| *v *= inv);
        }
    }
}
