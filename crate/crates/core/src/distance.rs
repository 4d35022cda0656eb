//! Euclidean distance kernels.

use ndarray::Array2;

const LANES: usize = 8;

/// Squared Euclidean distance with a fixed eight-lane accumulation order.
#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..LANES {
            let d = x[l] - y[l];
            acc[l] += d * d;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        let d = x - y;
        tail += d * d;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

/// Dense symmetric matrix of Euclidean distances between the rows of a
/// point matrix. Stored in full (n × n) for row-contiguous access.
#[derive(Debug, Clone)]
pub struct PairwiseDistances {
    n: usize,
    values: Vec<f64>,
}

impl PairwiseDistances {
    pub fn new(points: &Array2<f64>) -> Self {
        let n = points.nrows();
        let mut values = vec![0.0; n * n];
        let rows = row_slices(points);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = euclidean(rows[i], rows[j]);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        PairwiseDistances { n, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// Borrows each row of a standard-layout matrix as a slice.
pub(crate) fn row_slices(points: &Array2<f64>) -> Vec<&[f64]> {
    let cols = points.ncols();
    match points.as_slice() {
        Some(flat) if cols > 0 => flat.chunks_exact(cols).collect(),
        Some(_) => vec![&[][..]; points.nrows()],
        None => panic!("point matrix must be in standard (row-major) layout"),
    }
}
