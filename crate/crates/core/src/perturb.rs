//! Irrelevant-feature generation.
//!
//! Noise columns are statistically independent of the cluster labels. Each
//! column `j` is drawn from its own stream `derive(seed, j)`, so the first
//! `m` columns of a longer augmentation are exactly the columns of a
//! shorter one.

use std::fmt;
use std::str::FromStr;

use ndarray::{concatenate, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::dataset::{DatasetStats, LabeledDataset};
use crate::error::{Error, Result};
use crate::seeding::{self, SweepRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseKind {
    Gaussian,
    Uniform,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 2] = [NoiseKind::Gaussian, NoiseKind::Uniform];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Uniform => "uniform",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "uniform" => Ok(NoiseKind::Uniform),
            other => Err(Error::InvalidArgument(format!("unknown noise kind `{other}`"))),
        }
    }
}

/// Distribution family plus the baseline location/spread it is scaled by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub mu: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, mu: f64, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise needs finite mu and sigma >= 0 (mu = {mu}, sigma = {sigma})"
            )));
        }
        Ok(NoiseSpec { kind, mu, sigma, seed })
    }

    pub fn from_stats(kind: NoiseKind, stats: &DatasetStats, seed: u64) -> Result<Self> {
        NoiseSpec::new(kind, stats.mu, stats.sigma, seed)
    }

    fn with_location(self, mu: f64, sigma: f64) -> Self {
        NoiseSpec { mu, sigma, ..self }
    }
}

/// Per-column parameters of one Gaussian noise feature.
///
/// `mu_r = sign * (mu + sigma) * eta` and
/// `sigma_r = sigma * (1 + sign_2 * eta_2)`, with all four draws independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFeatureParams {
    pub eta: f64,
    pub sign: f64,
    pub eta_2: f64,
    pub sign_2: f64,
    pub mu_r: f64,
    pub sigma_r: f64,
}

impl GaussianFeatureParams {
    pub fn from_draws(mu: f64, sigma: f64, eta: f64, sign: f64, eta_2: f64, sign_2: f64) -> Self {
        GaussianFeatureParams {
            eta,
            sign,
            eta_2,
            sign_2,
            mu_r: sign * (mu + sigma) * eta,
            sigma_r: sigma * (1.0 + sign_2 * eta_2),
        }
    }
}

fn draw_sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<f64>() >= 0.5 {
        1.0
    } else {
        -1.0
    }
}

pub fn draw_gaussian_params<R: Rng + ?Sized>(spec: &NoiseSpec, rng: &mut R) -> GaussianFeatureParams {
    let eta: f64 = rng.random();
    let sign = draw_sign(rng);
    let eta_2: f64 = rng.random();
    let sign_2 = draw_sign(rng);
    GaussianFeatureParams::from_draws(spec.mu, spec.sigma, eta, sign, eta_2, sign_2)
}

/// One Gaussian noise column with freshly drawn mean and spread.
pub fn gaussian_feature<R: Rng + ?Sized>(spec: &NoiseSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("noise feature length must be positive".into()));
    }
    let params = draw_gaussian_params(spec, rng);
    let normal =
        Normal::new(params.mu_r, params.sigma_r).map_err(|e| Error::InvalidArgument(format!("gaussian noise: {e}")))?;
    Ok((0..n).map(|_| normal.sample(rng)).collect())
}

/// Half-width `mu + 2 sigma` of the uniform noise interval.
pub fn uniform_half_width(spec: &NoiseSpec) -> Result<f64> {
    let half_width = spec.mu + 2.0 * spec.sigma;
    if half_width > 0.0 {
        Ok(half_width)
    } else {
        Err(Error::InvertedRange {
            mu: spec.mu,
            sigma: spec.sigma,
            half_width,
        })
    }
}

/// One column of samples from `Uniform[-(mu + 2 sigma), mu + 2 sigma]`.
pub fn uniform_feature<R: Rng + ?Sized>(spec: &NoiseSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("noise feature length must be positive".into()));
    }
    let h = uniform_half_width(spec)?;
    let dist = Uniform::new_inclusive(-h, h).map_err(|e| Error::InvalidArgument(format!("uniform noise: {e}")))?;
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

fn feature<R: Rng + ?Sized>(spec: &NoiseSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    match spec.kind {
        NoiseKind::Gaussian => gaussian_feature(spec, n, rng),
        NoiseKind::Uniform => uniform_feature(spec, n, rng),
    }
}

pub fn column_rng(seed: u64, column: usize) -> SweepRng {
    seeding::rng_for(seed, &[column as u64])
}

/// A baseline dataset plus `m` appended noise columns (ratio `m : D`).
#[derive(Debug, Clone)]
pub struct AugmentedDataset {
    pub base: LabeledDataset,
    pub appended: Array2<f64>,
}

impl AugmentedDataset {
    pub fn noise_columns(&self) -> usize {
        self.appended.ncols()
    }

    /// `(appended, D)`.
    pub fn ratio(&self) -> (usize, usize) {
        (self.appended.ncols(), self.base.n_features())
    }

    pub fn ratio_value(&self) -> f64 {
        self.appended.ncols() as f64 / self.base.n_features() as f64
    }

    /// Baseline features followed by the noise columns.
    pub fn matrix(&self) -> Array2<f64> {
        concatenate(Axis(1), &[self.base.points().view(), self.appended.view()])
            .expect("row counts agree by construction")
            .as_standard_layout()
            .into_owned()
    }
}

/// Generates `count` noise columns for `n` rows with columns
/// `first..first + count` of the stream keyed by `spec.seed`.
pub fn noise_block(spec: &NoiseSpec, n: usize, first: usize, count: usize) -> Result<Array2<f64>> {
    noise_block_with(n, first, count, spec.seed, |_| *spec)
}

fn noise_block_with(
    n: usize,
    first: usize,
    count: usize,
    seed: u64,
    spec_for: impl Fn(usize) -> NoiseSpec,
) -> Result<Array2<f64>> {
    let mut block = Array2::<f64>::zeros((n, count));
    for offset in 0..count {
        let column = first + offset;
        let mut rng = column_rng(seed, column);
        let values = feature(&spec_for(column), n, &mut rng)?;
        block
            .column_mut(offset)
            .iter_mut()
            .zip(values)
            .for_each(|(dst, v)| *dst = v);
    }
    Ok(block)
}

/// Appends `count` noise columns drawn with the pooled `spec.mu`/`spec.sigma`.
pub fn append_noise(base: &LabeledDataset, spec: &NoiseSpec, count: usize) -> Result<AugmentedDataset> {
    let appended = noise_block(spec, base.n_points(), 0, count)?;
    Ok(AugmentedDataset {
        base: base.clone(),
        appended,
    })
}

/// Like [`append_noise`], but noise column `j` takes its location and spread
/// from baseline feature `j mod D` instead of the pooled statistics.
pub fn append_noise_per_feature(
    base: &LabeledDataset,
    stats: &DatasetStats,
    kind: NoiseKind,
    seed: u64,
    count: usize,
) -> Result<AugmentedDataset> {
    let appended = per_feature_block(base.n_points(), stats, kind, seed, 0, count)?;
    Ok(AugmentedDataset {
        base: base.clone(),
        appended,
    })
}

pub(crate) fn per_feature_block(
    n: usize,
    stats: &DatasetStats,
    kind: NoiseKind,
    seed: u64,
    first: usize,
    count: usize,
) -> Result<Array2<f64>> {
    let d = stats.per_feature_mu.len();
    if d == 0 {
        return Err(Error::InvalidArgument("baseline has no features".into()));
    }
    let template = NoiseSpec::new(kind, stats.mu, stats.sigma, seed)?;
    noise_block_with(n, first, count, seed, |column| {
        template.with_location(stats.per_feature_mu[column % d], stats.per_feature_sigma[column % d])
    })
}
