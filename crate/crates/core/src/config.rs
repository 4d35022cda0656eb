//! Sweep configuration files.
//!
//! Line-oriented `key = value` pairs. Global keys come first; each dataset
//! is introduced by a `[dataset]` header. Blank lines and lines starting
//! with `#` are ignored. Only the keys below are accepted.
//!
//! ```text
//! noise_kinds = gaussian, uniform
//! scalings = none, centered, standardized
//! max_ratio = 3:1
//! ratio_step = D/8
//! repeats = 50
//! master_seed = 1
//!
//! [dataset]
//! name = dim32
//! dims = 32
//! separation = 10
//! seed = 7
//!
//! [dataset]
//! data = dim064.txt
//! labels = dim064.pa
//! ```
//!
//! A dataset section is either a generator (`dims`, plus optional
//! `clusters`, `per_cluster`, `separation`, `seed`) or a file pair (`data`
//! and `labels`, resolved relative to the config file).

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiment::{DatasetSource, NoiseStats, RatioStep, SweepConfig};

pub const DEFAULT_SEPARATION: f64 = 10.0;

const GLOBAL_KEYS: &[&str] = &[
    "noise_kinds",
    "scalings",
    "max_ratio",
    "ratio_step",
    "repeats",
    "master_seed",
    "redraw_noise_per_repeat",
    "noise_stats",
    "max_iterations",
    "tolerance",
    "n_init",
];

const DATASET_KEYS: &[&str] = &[
    "name",
    "data",
    "labels",
    "dims",
    "clusters",
    "per_cluster",
    "separation",
    "seed",
];

#[derive(Default)]
struct DatasetSection {
    line: usize,
    name: Option<String>,
    data: Option<PathBuf>,
    labels: Option<PathBuf>,
    dims: Option<usize>,
    clusters: Option<usize>,
    per_cluster: Option<usize>,
    separation: Option<f64>,
    seed: Option<u64>,
    seen: HashSet<String>,
}

impl DatasetSection {
    fn finish(self) -> Result<DatasetSource> {
        let err = |message: String| Error::Config {
            line: self.line,
            message,
        };
        let has_files = self.data.is_some() || self.labels.is_some();
        let has_generator = self.dims.is_some()
            || self.clusters.is_some()
            || self.per_cluster.is_some()
            || self.separation.is_some()
            || self.seed.is_some();
        match (has_files, has_generator) {
            (true, true) => Err(err("dataset mixes file keys with generator keys".into())),
            (false, false) => Err(err("dataset needs either `data`/`labels` or `dims`".into())),
            (true, false) => match (self.data, self.labels) {
                (Some(data), Some(labels)) => Ok(DatasetSource::Files {
                    name: self.name,
                    data,
                    labels,
                }),
                _ => Err(err("file dataset needs both `data` and `labels`".into())),
            },
            (false, true) => {
                let dims = self.dims.ok_or_else(|| err("generated dataset needs `dims`".into()))?;
                Ok(DatasetSource::Generated {
                    name: self.name,
                    dims,
                    clusters: self.clusters.unwrap_or(16),
                    per_cluster: self.per_cluster.unwrap_or(64),
                    separation: self.separation.unwrap_or(DEFAULT_SEPARATION),
                    seed: self.seed.unwrap_or(0),
                })
            }
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        message: format!("invalid value `{value}` for `{key}`"),
    })
}

fn parse_positive(line: usize, key: &str, value: &str) -> Result<usize> {
    let v: usize = parse_value(line, key, value)?;
    if v == 0 {
        return Err(Error::Config {
            line,
            message: format!("`{key}` must be at least 1"),
        });
    }
    Ok(v)
}

fn parse_list<T: FromStr<Err = Error>>(line: usize, value: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for token in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let item = token.parse().map_err(|e: Error| Error::Config {
            line,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    if out.is_empty() {
        return Err(Error::Config {
            line,
            message: "empty list".into(),
        });
    }
    Ok(out)
}

/// Accepts `3`, `2.5` or `3:1` style ratios.
fn parse_ratio(line: usize, value: &str) -> Result<f64> {
    let bad = || Error::Config {
        line,
        message: format!("invalid ratio `{value}`"),
    };
    let ratio = match value.split_once(':') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            num / den
        }
        None => value.parse().map_err(|_| bad())?,
    };
    if ratio > 0.0 && ratio.is_finite() {
        Ok(ratio)
    } else {
        Err(bad())
    }
}

fn parse_step(line: usize, value: &str) -> Result<RatioStep> {
    match value.strip_prefix("D/").or_else(|| value.strip_prefix("d/")) {
        Some(div) => Ok(RatioStep::PerFeatures(parse_positive(line, "ratio_step", div.trim())?)),
        None => Ok(RatioStep::Columns(parse_positive(line, "ratio_step", value)?)),
    }
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config {
            line,
            message: format!("invalid boolean `{value}` for `{key}`"),
        }),
    }
}

/// Parses configuration text; relative dataset paths are joined onto `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<SweepConfig> {
    let mut config = SweepConfig::default();
    let mut seen_global = HashSet::new();
    let mut sections: Vec<DatasetSection> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix('[') {
            let header = header.strip_suffix(']').map(str::trim);
            match header {
                Some("dataset") => {
                    sections.push(DatasetSection {
                        line,
                        ..DatasetSection::default()
                    });
                    continue;
                }
                _ => {
                    return Err(Error::Config {
                        line,
                        message: format!("unknown section `{trimmed}`"),
                    })
                }
            }
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `key = value`, found `{trimmed}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());

        if let Some(section) = sections.last_mut() {
            if !DATASET_KEYS.contains(&key) {
                return Err(Error::Config {
                    line,
                    message: format!("unknown dataset key `{key}`"),
                });
            }
            if !section.seen.insert(key.to_string()) {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            match key {
                "name" => section.name = Some(value.to_string()),
                "data" => section.data = Some(base_dir.join(value)),
                "labels" => section.labels = Some(base_dir.join(value)),
                "dims" => section.dims = Some(parse_positive(line, key, value)?),
                "clusters" => section.clusters = Some(parse_positive(line, key, value)?),
                "per_cluster" => section.per_cluster = Some(parse_positive(line, key, value)?),
                "separation" => {
                    let s: f64 = parse_value(line, key, value)?;
                    if !(s > 0.0 && s.is_finite()) {
                        return Err(Error::Config {
                            line,
                            message: "`separation` must be positive".into(),
                        });
                    }
                    section.separation = Some(s);
                }
                "seed" => section.seed = Some(parse_value(line, key, value)?),
                _ => unreachable!("checked against DATASET_KEYS"),
            }
            continue;
        }

        if !GLOBAL_KEYS.contains(&key) {
            return Err(Error::Config {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        if !seen_global.insert(key.to_string()) {
            return Err(Error::Config {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        match key {
            "noise_kinds" => config.noise_kinds = dedup(parse_list(line, value)?),
            "scalings" => config.scalings = dedup(parse_list(line, value)?),
            "max_ratio" => config.max_ratio = parse_ratio(line, value)?,
            "ratio_step" => config.ratio_step = parse_step(line, value)?,
            "repeats" => config.repeats = parse_positive(line, key, value)?,
            "master_seed" => config.master_seed = parse_value(line, key, value)?,
            "redraw_noise_per_repeat" => config.redraw_noise_per_repeat = parse_bool(line, key, value)?,
            "noise_stats" => {
                config.noise_stats = match value {
                    "pooled" => NoiseStats::Pooled,
                    "per_feature" => NoiseStats::PerFeature,
                    _ => {
                        return Err(Error::Config {
                            line,
                            message: format!("invalid value `{value}` for `noise_stats`"),
                        })
                    }
                }
            }
            "max_iterations" => config.max_iterations = parse_positive(line, key, value)?,
            "tolerance" => {
                let t: f64 = parse_value(line, key, value)?;
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(Error::Config {
                        line,
                        message: "`tolerance` must be non-negative".into(),
                    });
                }
                config.tolerance = t;
            }
            "n_init" => config.n_init = parse_positive(line, key, value)?,
            _ => unreachable!("checked against GLOBAL_KEYS"),
        }
    }

    if sections.is_empty() {
        return Err(Error::Config {
            line: text.lines().count().max(1),
            message: "no [dataset] section".into(),
        });
    }
    config.datasets = sections
        .into_iter()
        .map(DatasetSection::finish)
        .collect::<Result<_>>()?;
    Ok(config)
}

fn dedup<T: PartialEq>(items: Vec<T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

pub fn load_config(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

/// Canonical configuration text. Absolute dataset paths survive a
/// round trip through [`parse_config`]; in-memory datasets become comments.
impl fmt::Display for SweepConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "noise_kinds = {}", join(&self.noise_kinds))?;
        writeln!(f, "scalings = {}", join(&self.scalings))?;
        writeln!(f, "max_ratio = {}", self.max_ratio)?;
        writeln!(f, "ratio_step = {}", self.ratio_step)?;
        writeln!(f, "repeats = {}", self.repeats)?;
        writeln!(f, "master_seed = {}", self.master_seed)?;
        writeln!(f, "redraw_noise_per_repeat = {}", self.redraw_noise_per_repeat)?;
        writeln!(f, "noise_stats = {}", self.noise_stats.as_str())?;
        writeln!(f, "max_iterations = {}", self.max_iterations)?;
        writeln!(f, "tolerance = {}", self.tolerance)?;
        writeln!(f, "n_init = {}", self.n_init)?;
        for ds in &self.datasets {
            writeln!(f)?;
            match ds {
                DatasetSource::Files { name, data, labels } => {
                    writeln!(f, "[dataset]")?;
                    if let Some(n) = name {
                        writeln!(f, "name = {n}")?;
                    }
                    writeln!(f, "data = {}", data.display())?;
                    writeln!(f, "labels = {}", labels.display())?;
                }
                DatasetSource::Generated {
                    name,
                    dims,
                    clusters,
                    per_cluster,
                    separation,
                    seed,
                } => {
                    writeln!(f, "[dataset]")?;
                    if let Some(n) = name {
                        writeln!(f, "name = {n}")?;
                    }
                    writeln!(f, "dims = {dims}")?;
                    writeln!(f, "clusters = {clusters}")?;
                    writeln!(f, "per_cluster = {per_cluster}")?;
                    writeln!(f, "separation = {separation}")?;
                    writeln!(f, "seed = {seed}")?;
                }
                DatasetSource::InMemory(ds) => {
                    writeln!(
                        f,
                        "# in-memory dataset `{}` ({} x {})",
                        ds.name(),
                        ds.n_points(),
                        ds.n_features()
                    )?;
                }
            }
        }
        Ok(())
    }
}
