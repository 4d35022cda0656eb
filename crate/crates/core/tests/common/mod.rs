//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use ndarray::Array2;
use rand::Rng;

/// Pair counts by enumerating every unordered pair:
/// (together in both, apart in both, total, together in x, together in y).
pub fn enumerate_pairs(x: &[usize], y: &[usize]) -> (u64, u64, u64, u64, u64) {
    let n = x.len();
    let (mut a, mut b, mut total, mut tx, mut ty) = (0, 0, 0, 0, 0);
    for i in 0..n {
        for j in i + 1..n {
            let sx = x[i] == x[j];
            let sy = y[i] == y[j];
            total += 1;
            tx += sx as u64;
            ty += sy as u64;
            if sx && sy {
                a += 1;
            }
            if !sx && !sy {
                b += 1;
            }
        }
    }
    (a, b, total, tx, ty)
}

pub fn rand_index_oracle(x: &[usize], y: &[usize]) -> f64 {
    let (a, b, total, _, _) = enumerate_pairs(x, y);
    (a + b) as f64 / total as f64
}

/// ARI as an exact rational from enumerated pair counts: the textbook
/// (index - expected) / (max - expected) multiplied through by 2·total.
pub fn ari_oracle(x: &[usize], y: &[usize]) -> f64 {
    let (a, _, total, tx, ty) = enumerate_pairs(x, y);
    let (a, total, tx, ty) = (a as i128, total as i128, tx as i128, ty as i128);
    let num = 2 * (total * a - tx * ty);
    let den = total * (tx + ty) - 2 * tx * ty;
    if den == 0 {
        return 1.0;
    }
    num as f64 / den as f64
}

fn counts<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = K>) -> HashMap<K, f64> {
    let mut m = HashMap::new();
    for k in keys {
        *m.entry(k).or_insert(0.0) += 1.0;
    }
    m
}

/// NMI with arithmetic-mean normalization, entropies in the given log base.
pub fn nmi_oracle_base(x: &[usize], y: &[usize], base: f64) -> f64 {
    let n = x.len() as f64;
    let log = |v: f64| v.ln() / base.ln();
    let px = counts(x.iter().copied());
    let py = counts(y.iter().copied());
    let pxy = counts(x.iter().copied().zip(y.iter().copied()));
    let entropy = |m: &HashMap<usize, f64>| -> f64 { -m.values().map(|&c| (c / n) * log(c / n)).sum::<f64>() };
    let hx = entropy(&px);
    let hy = entropy(&py);
    let mut mi = 0.0;
    for (&(i, j), &c) in &pxy {
        let p = c / n;
        mi += p * log(p / ((px[&i] / n) * (py[&j] / n)));
    }
    if hx == 0.0 && hy == 0.0 {
        return 1.0;
    }
    if mi <= 0.0 {
        return 0.0;
    }
    mi / ((hx + hy) / 2.0)
}

pub fn nmi_oracle(x: &[usize], y: &[usize]) -> f64 {
    nmi_oracle_base(x, y, std::f64::consts::E)
}

fn dist(m: &Array2<f64>, i: usize, j: usize) -> f64 {
    m.row(i)
        .iter()
        .zip(m.row(j).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Mean silhouette by direct summation; singletons contribute 0.
pub fn silhouette_oracle(m: &Array2<f64>, labels: &[usize]) -> f64 {
    let n = labels.len();
    let clusters: Vec<usize> = {
        let mut c: Vec<usize> = labels.to_vec();
        c.sort();
        c.dedup();
        c
    };
    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i];
        let size = labels.iter().filter(|&&l| l == own).count();
        if size == 1 {
            continue;
        }
        let mut d_w = 0.0;
        for j in 0..n {
            if j != i && labels[j] == own {
                d_w += dist(m, i, j);
            }
        }
        d_w /= (size - 1) as f64;
        let mut d_n = f64::INFINITY;
        for &c in &clusters {
            if c == own {
                continue;
            }
            let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
            let mean = members.iter().map(|&j| dist(m, i, j)).sum::<f64>() / members.len() as f64;
            d_n = d_n.min(mean);
        }
        let denom = d_w.max(d_n);
        if denom > 0.0 {
            total += (d_n - d_w) / denom;
        }
    }
    total / n as f64
}

/// Davies-Bouldin by a double loop over clusters.
pub fn davies_bouldin_oracle(m: &Array2<f64>, labels: &[usize]) -> f64 {
    let mut clusters: Vec<usize> = labels.to_vec();
    clusters.sort();
    clusters.dedup();
    let d = m.ncols();
    let mut centroids = Vec::new();
    let mut deltas = Vec::new();
    for &c in &clusters {
        let members: Vec<usize> = (0..labels.len()).filter(|&j| labels[j] == c).collect();
        let mut centroid = vec![0.0; d];
        for &j in &members {
            for f in 0..d {
                centroid[f] += m[[j, f]];
            }
        }
        for v in centroid.iter_mut() {
            *v /= members.len() as f64;
        }
        let delta = members
            .iter()
            .map(|&j| (0..d).map(|f| (m[[j, f]] - centroid[f]).powi(2)).sum::<f64>().sqrt())
            .sum::<f64>()
            / members.len() as f64;
        centroids.push(centroid);
        deltas.push(delta);
    }
    let k = clusters.len();
    let mut sum = 0.0;
    for i in 0..k {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..k {
            if i == j {
                continue;
            }
            let sep = (0..d)
                .map(|f| (centroids[i][f] - centroids[j][f]).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max((deltas[i] + deltas[j]) / sep);
        }
        sum += worst;
    }
    sum / k as f64
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| rng.random_range(-5.0..5.0))
}

/// Labels in `0..k` with at least two distinct values.
pub fn random_labels_multi<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut labels = random_labels(rng, n, k);
    if labels.iter().all(|&l| l == labels[0]) {
        labels[0] = (labels[0] + 1) % k;
    }
    labels
}
