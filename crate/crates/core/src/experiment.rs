//! Noise-injection sweeps.
//!
//! For every dataset, noise kind and scaling, noise columns are appended in
//! increments, the augmented matrix is scaled, clustered `repeats` times and
//! scored. Each (dataset, noise, scaling, level) cell is an independent task
//! whose random streams are derived from the master seed and the cell's
//! coordinates, so results do not depend on thread count or on which other
//! cells are planned.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use ndarray::{concatenate, s, Array2, Axis};
use rayon::prelude::*;

use crate::dataset::{compute_stats, generate_dim_like, load_dataset, DatasetStats, LabeledDataset};
use crate::distance::PairwiseDistances;
use crate::error::{Error, Result};
use crate::kmeans::{self, KMeansConfig};
use crate::metrics::{Metric, MetricReport};
use crate::perturb::{noise_block, per_feature_block, NoiseKind, NoiseSpec};
use crate::scale::{apply_scaling, ScalingKind};
use crate::seeding::derive_seed;

const NOISE_STREAM: u64 = 1;
const CLUSTER_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Files {
        name: Option<String>,
        data: PathBuf,
        labels: PathBuf,
    },
    Generated {
        name: Option<String>,
        dims: usize,
        clusters: usize,
        per_cluster: usize,
        separation: f64,
        seed: u64,
    },
    InMemory(Arc<LabeledDataset>),
}

impl DatasetSource {
    /// A Dimsets-like generator source (16 clusters of 64 points).
    pub fn dim_like(dims: usize, separation: f64, seed: u64) -> Self {
        DatasetSource::Generated {
            name: None,
            dims,
            clusters: 16,
            per_cluster: 64,
            separation,
            seed,
        }
    }

    pub fn resolve(&self) -> Result<LabeledDataset> {
        match self {
            DatasetSource::Files { name, data, labels } => {
                let ds = load_dataset(data, labels)?;
                Ok(match name {
                    Some(n) => ds.with_name(n.clone()),
                    None => ds,
                })
            }
            DatasetSource::Generated {
                name,
                dims,
                clusters,
                per_cluster,
                separation,
                seed,
            } => {
                let ds = generate_dim_like(*dims, *clusters, *per_cluster, *separation, *seed)?;
                Ok(match name {
                    Some(n) => ds.with_name(n.clone()),
                    None => ds,
                })
            }
            DatasetSource::InMemory(ds) => Ok(ds.as_ref().clone()),
        }
    }
}

/// Number of noise columns added per sweep level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioStep {
    Columns(usize),
    /// `ceil(D / divisor)` columns, i.e. `divisor` levels per unit ratio.
    PerFeatures(usize),
}

impl RatioStep {
    pub fn columns(self, d: usize) -> usize {
        match self {
            RatioStep::Columns(c) => c,
            RatioStep::PerFeatures(div) => d.div_ceil(div.max(1)),
        }
    }
}

impl fmt::Display for RatioStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioStep::Columns(c) => write!(f, "{c}"),
            RatioStep::PerFeatures(div) => write!(f, "D/{div}"),
        }
    }
}

/// Where the location/spread of the noise distribution comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseStats {
    /// Mean and standard deviation pooled over every baseline entry.
    Pooled,
    /// Noise column `j` uses baseline feature `j mod D`.
    PerFeature,
}

impl NoiseStats {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseStats::Pooled => "pooled",
            NoiseStats::PerFeature => "per_feature",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub datasets: Vec<DatasetSource>,
    pub noise_kinds: Vec<NoiseKind>,
    pub scalings: Vec<ScalingKind>,
    pub max_ratio: f64,
    pub ratio_step: RatioStep,
    pub repeats: usize,
    pub master_seed: u64,
    pub redraw_noise_per_repeat: bool,
    pub noise_stats: NoiseStats,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Seedings per k-means run; the lowest-inertia result is scored.
    pub n_init: usize,
    /// Keep per-repeat metric values in [`SweepResult::raw`].
    pub retain_raw: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            datasets: Vec::new(),
            noise_kinds: NoiseKind::ALL.to_vec(),
            scalings: ScalingKind::ALL.to_vec(),
            max_ratio: 3.0,
            ratio_step: RatioStep::Columns(1),
            repeats: 50,
            master_seed: 0,
            redraw_noise_per_repeat: false,
            noise_stats: NoiseStats::Pooled,
            max_iterations: KMeansConfig::DEFAULT_MAX_ITERATIONS,
            tolerance: KMeansConfig::DEFAULT_TOLERANCE,
            n_init: 1,
            retain_raw: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.datasets.is_empty() {
            return bad("at least one dataset is required");
        }
        if self.noise_kinds.is_empty() || self.scalings.is_empty() {
            return bad("noise_kinds and scalings must be non-empty");
        }
        if !(self.max_ratio > 0.0 && self.max_ratio.is_finite()) {
            return bad("max_ratio must be positive");
        }
        if matches!(self.ratio_step, RatioStep::Columns(0) | RatioStep::PerFeatures(0)) {
            return bad("ratio_step must be at least 1");
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return bad("tolerance must be non-negative");
        }
        if self.n_init == 0 {
            return bad("n_init must be at least 1");
        }
        Ok(())
    }

    /// Noise-column counts sampled for a baseline with `d` features.
    pub fn levels(&self, d: usize) -> Vec<usize> {
        let max = (self.max_ratio * d as f64 - 1e-9).ceil().max(0.0) as usize;
        let step = self.ratio_step.columns(d).max(1);
        (0..=max).step_by(step).collect()
    }

    /// Seed of the noise stream for one dataset/kind (and repeat, when
    /// noise is redrawn per repeat).
    pub fn noise_seed(&self, dataset: usize, kind: NoiseKind, repeat: Option<usize>) -> u64 {
        let mut path = vec![NOISE_STREAM, dataset as u64, kind as u64];
        if let Some(r) = repeat {
            path.push(r as u64);
        }
        derive_seed(self.master_seed, &path)
    }

    /// Seed of one k-means run. The noise kind is not part of the path, so
    /// the ratio-0 cells of both kinds cluster identically.
    pub fn cluster_seed(&self, dataset: usize, scaling: ScalingKind, level: usize, repeat: usize) -> u64 {
        derive_seed(
            self.master_seed,
            &[
                CLUSTER_STREAM,
                dataset as u64,
                scaling as u64,
                level as u64,
                repeat as u64,
            ],
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    Error(String),
}

impl CellStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, CellStatus::Ok)
    }
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellStatus::Ok => f.write_str("ok"),
            CellStatus::Error(code) => write!(f, "error:{code}"),
        }
    }
}

impl std::str::FromStr for CellStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(CellStatus::Ok),
            other => match other.strip_prefix("error:") {
                Some(code) if !code.is_empty() => Ok(CellStatus::Error(code.to_string())),
                _ => Err(Error::Schema(format!("invalid status `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Arithmetic mean and population standard deviation, summed in order.
pub fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    MeanStd { mean, std: var.sqrt() }
}

/// Aggregated outcome of one (dataset, noise, scaling, level) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub dataset: String,
    pub dataset_index: usize,
    pub noise: NoiseKind,
    pub scaling: ScalingKind,
    pub appended: usize,
    pub base_features: usize,
    pub status: CellStatus,
    /// Error text for failed cells.
    pub message: Option<String>,
    pub repeats: usize,
    /// Indexed like [`Metric::ALL`]; `None` for failed cells.
    pub stats: Option<[MeanStd; 5]>,
}

impl SweepCell {
    pub fn ratio(&self) -> f64 {
        self.appended as f64 / self.base_features as f64
    }

    pub fn stat(&self, metric: Metric) -> Option<MeanStd> {
        let idx = Metric::ALL.iter().position(|&m| m == metric)?;
        self.stats.map(|s| s[idx])
    }
}

/// One line of the long-form summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub noise: NoiseKind,
    pub scaling: ScalingKind,
    pub ratio: f64,
    pub metric: Metric,
    pub mean: f64,
    pub std: f64,
    pub repeats: usize,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub dataset: String,
    pub noise: NoiseKind,
    pub scaling: ScalingKind,
    pub ratio: f64,
    pub repeat: usize,
    pub seed: u64,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub version: String,
    pub config: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    /// Per-repeat values, only filled when `retain_raw` is set.
    pub raw: Vec<RawRecord>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn rows(&self) -> Vec<SummaryRow> {
        summary_rows(&self.cells)
    }

    pub fn cell(&self, dataset: &str, noise: NoiseKind, scaling: ScalingKind, appended: usize) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.dataset == dataset && c.noise == noise && c.scaling == scaling && c.appended == appended)
    }

    pub fn tipping_points(&self, metric: Metric, threshold: f64) -> Result<Vec<TippingPoint>> {
        summarize_tipping(&self.rows(), metric, threshold)
    }
}

pub fn summary_rows(cells: &[SweepCell]) -> Vec<SummaryRow> {
    let mut rows = Vec::with_capacity(cells.len() * Metric::ALL.len());
    for cell in cells {
        for (i, metric) in Metric::ALL.into_iter().enumerate() {
            let (mean, std) = match cell.stats {
                Some(s) => (s[i].mean, s[i].std),
                None => (f64::NAN, f64::NAN),
            };
            rows.push(SummaryRow {
                dataset: cell.dataset.clone(),
                noise: cell.noise,
                scaling: cell.scaling,
                ratio: cell.ratio(),
                metric,
                mean,
                std,
                repeats: cell.repeats,
                status: cell.status.clone(),
            });
        }
    }
    rows
}

struct Prepared {
    data: LabeledDataset,
    stats: DatasetStats,
    levels: Vec<usize>,
}

struct Task {
    dataset: usize,
    noise: usize,
    scaling: ScalingKind,
    appended: usize,
}

struct CellOutcome {
    cell: SweepCell,
    raw: Vec<RawRecord>,
}

/// Runs the full sweep on the ambient rayon pool.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let prepared = config
        .datasets
        .iter()
        .map(|src| {
            let data = src.resolve()?;
            if data.n_points() < 2 {
                return Err(Error::TooFewRows {
                    rows: data.n_points(),
                    required: 2,
                });
            }
            let stats = compute_stats(&data)?;
            let levels = config.levels(data.n_features());
            Ok(Prepared { data, stats, levels })
        })
        .collect::<Result<Vec<_>>>()?;

    // Fixed-noise mode: the widest block per (dataset, kind), sliced per level.
    // A failed block is left as `None`; affected cells regenerate it and
    // report the error themselves.
    let noise_cache: Vec<Vec<Option<Arc<Array2<f64>>>>> = if config.redraw_noise_per_repeat {
        Vec::new()
    } else {
        prepared
            .iter()
            .enumerate()
            .map(|(di, p)| {
                let widest = p.levels.last().copied().unwrap_or(0);
                config
                    .noise_kinds
                    .iter()
                    .map(|&kind| {
                        let seed = config.noise_seed(di, kind, None);
                        noise_columns(config, p, kind, seed, widest).ok().map(Arc::new)
                    })
                    .collect()
            })
            .collect()
    };

    let mut tasks = Vec::new();
    for (di, p) in prepared.iter().enumerate() {
        for ni in 0..config.noise_kinds.len() {
            for &scaling in &config.scalings {
                for &appended in &p.levels {
                    tasks.push(Task {
                        dataset: di,
                        noise: ni,
                        scaling,
                        appended,
                    });
                }
            }
        }
    }

    let outcomes: Vec<CellOutcome> = tasks
        .par_iter()
        .map(|task| {
            let cached = noise_cache
                .get(task.dataset)
                .and_then(|per_kind| per_kind[task.noise].as_deref());
            run_cell(config, &prepared[task.dataset], task, cached)
        })
        .collect();

    let mut cells = Vec::with_capacity(outcomes.len());
    let mut raw = Vec::new();
    for outcome in outcomes {
        cells.push(outcome.cell);
        raw.extend(outcome.raw);
    }
    Ok(SweepResult {
        cells,
        raw,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.to_string(),
        },
    })
}

fn noise_columns(config: &SweepConfig, p: &Prepared, kind: NoiseKind, seed: u64, count: usize) -> Result<Array2<f64>> {
    let n = p.data.n_points();
    match config.noise_stats {
        NoiseStats::Pooled => {
            let spec = NoiseSpec::from_stats(kind, &p.stats, seed)?;
            noise_block(&spec, n, 0, count)
        }
        NoiseStats::PerFeature => per_feature_block(n, &p.stats, kind, seed, 0, count),
    }
}

fn augmented(base: &LabeledDataset, noise: &Array2<f64>, appended: usize) -> Array2<f64> {
    concatenate(Axis(1), &[base.points().view(), noise.slice(s![.., ..appended])])
        .expect("row counts agree")
        .as_standard_layout()
        .into_owned()
}

fn run_cell(config: &SweepConfig, p: &Prepared, task: &Task, cached: Option<&Array2<f64>>) -> CellOutcome {
    let kind = config.noise_kinds[task.noise];
    let mut cell = SweepCell {
        dataset: p.data.name().to_string(),
        dataset_index: task.dataset,
        noise: kind,
        scaling: task.scaling,
        appended: task.appended,
        base_features: p.data.n_features(),
        status: CellStatus::Ok,
        message: None,
        repeats: config.repeats,
        stats: None,
    };
    match evaluate_cell(config, p, task, kind, cached) {
        Ok((reports, seeds)) => {
            let mut stats = [MeanStd { mean: 0.0, std: 0.0 }; 5];
            for (slot, metric) in stats.iter_mut().zip(Metric::ALL) {
                let values: Vec<f64> = reports.iter().map(|r| r.get(metric)).collect();
                *slot = mean_std(&values);
            }
            cell.stats = Some(stats);
            let raw = if config.retain_raw {
                reports
                    .into_iter()
                    .zip(seeds)
                    .enumerate()
                    .map(|(repeat, (report, seed))| RawRecord {
                        dataset: cell.dataset.clone(),
                        noise: kind,
                        scaling: task.scaling,
                        ratio: cell.ratio(),
                        repeat,
                        seed,
                        report,
                    })
                    .collect()
            } else {
                Vec::new()
            };
            CellOutcome { cell, raw }
        }
        Err(e) => {
            cell.status = CellStatus::Error(e.code().to_string());
            cell.message = Some(e.to_string());
            cell.repeats = 0;
            CellOutcome { cell, raw: Vec::new() }
        }
    }
}

fn evaluate_cell(
    config: &SweepConfig,
    p: &Prepared,
    task: &Task,
    kind: NoiseKind,
    cached: Option<&Array2<f64>>,
) -> Result<(Vec<MetricReport>, Vec<u64>)> {
    let truth = p.data.labels();
    let k = p.data.n_clusters();
    let mut reports = Vec::with_capacity(config.repeats);
    let mut seeds = Vec::with_capacity(config.repeats);

    let cluster_once =
        |matrix: &Array2<f64>, distances: &PairwiseDistances, repeat: usize| -> Result<(MetricReport, u64)> {
            let seed = config.cluster_seed(task.dataset, task.scaling, task.appended, repeat);
            let km = KMeansConfig {
                k,
                max_iterations: config.max_iterations,
                tolerance: config.tolerance,
                n_init: config.n_init,
                ..KMeansConfig::new(k, seed)
            };
            let fit = kmeans::fit(matrix, &km)?;
            let report = MetricReport::evaluate(matrix, &fit.assignments, truth, Some(distances))?;
            Ok((report, seed))
        };

    let fixed_noise = task.appended == 0 || !config.redraw_noise_per_repeat;
    if fixed_noise {
        let raw_matrix = if task.appended == 0 {
            p.data.points().clone()
        } else {
            match cached {
                Some(block) => augmented(&p.data, block, task.appended),
                None => {
                    let seed = config.noise_seed(task.dataset, kind, None);
                    let block = noise_columns(config, p, kind, seed, task.appended)?;
                    augmented(&p.data, &block, task.appended)
                }
            }
        };
        let matrix = apply_scaling(&raw_matrix, task.scaling)?;
        let distances = PairwiseDistances::new(&matrix);
        for repeat in 0..config.repeats {
            let (report, seed) = cluster_once(&matrix, &distances, repeat)?;
            reports.push(report);
            seeds.push(seed);
        }
    } else {
        for repeat in 0..config.repeats {
            let noise_seed = config.noise_seed(task.dataset, kind, Some(repeat));
            let noise = noise_columns(config, p, kind, noise_seed, task.appended)?;
            let matrix = apply_scaling(&augmented(&p.data, &noise, task.appended), task.scaling)?;
            let distances = PairwiseDistances::new(&matrix);
            let (report, seed) = cluster_once(&matrix, &distances, repeat)?;
            reports.push(report);
            seeds.push(seed);
        }
    }
    Ok((reports, seeds))
}

/// Ratio at which one curve's mean drops below the threshold for good.
#[derive(Debug, Clone, PartialEq)]
pub struct TippingPoint {
    pub dataset: String,
    pub noise: NoiseKind,
    pub scaling: ScalingKind,
    pub ratio: Option<f64>,
}

type Curve = (String, NoiseKind, ScalingKind, Vec<(f64, f64)>);

/// For each (dataset, noise, scaling) curve of `metric`, the smallest
/// sampled ratio from which the mean stays below `threshold` at every larger
/// sampled ratio. Failed cells are skipped.
pub fn summarize_tipping(rows: &[SummaryRow], metric: Metric, threshold: f64) -> Result<Vec<TippingPoint>> {
    let selected: Vec<&SummaryRow> = rows.iter().filter(|r| r.metric == metric).collect();
    if selected.is_empty() {
        return Err(Error::UnknownMetric(format!("{metric} (not present in result)")));
    }
    let mut curves: Vec<Curve> = Vec::new();
    for r in selected {
        if !r.status.is_ok() {
            continue;
        }
        let pos = curves
            .iter()
            .position(|(d, n, s, _)| *d == r.dataset && *n == r.noise && *s == r.scaling);
        match pos {
            Some(i) => curves[i].3.push((r.ratio, r.mean)),
            None => curves.push((r.dataset.clone(), r.noise, r.scaling, vec![(r.ratio, r.mean)])),
        }
    }
    Ok(curves
        .into_iter()
        .map(|(dataset, noise, scaling, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut tip = None;
            for &(ratio, mean) in points.iter().rev() {
                if mean < threshold {
                    tip = Some(ratio);
                } else {
                    break;
                }
            }
            TippingPoint {
                dataset,
                noise,
                scaling,
                ratio: tip,
            }
        })
        .collect())
}
