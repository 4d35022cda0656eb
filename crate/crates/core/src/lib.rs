//! Measures how k-means cluster-validity indices respond to irrelevant
//! random features.
//!
//! A baseline dataset with known labels is augmented column by column with
//! Gaussian or uniform noise, optionally centered or standardized,
//! clustered with k-means++ and scored with NMI, (adjusted) Rand index,
//! silhouette and Davies-Bouldin. [`experiment::run_sweep`] drives the whole
//! grid and aggregates repeated runs into mean/std curves.

pub mod config;
pub mod dataset;
pub mod distance;
pub mod error;
pub mod experiment;
pub mod kmeans;
pub mod metrics;
pub mod perturb;
pub mod report;
pub mod scale;
pub mod seeding;

pub use dataset::{compute_stats, generate_dim_like, load_dataset, DatasetStats, LabeledDataset};
pub use error::{Error, Result};
pub use experiment::{
    run_sweep, summarize_tipping, CellStatus, DatasetSource, NoiseStats, RatioStep, SummaryRow, SweepCell, SweepConfig,
    SweepResult, TippingPoint,
};
pub use kmeans::{fit, ClusteringResult, KMeansConfig};
pub use metrics::{Metric, MetricReport, PartitionPair};
pub use perturb::{append_noise, AugmentedDataset, NoiseKind, NoiseSpec};
pub use scale::{apply_scaling, ScalingKind};
