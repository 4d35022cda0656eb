use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use cluster_sense::config::{load_config, DEFAULT_SEPARATION};
use cluster_sense::report::{read_summary_csv, render_panels, write_raw_csv, write_summary_csv};
use cluster_sense::{generate_dim_like, run_sweep, SweepResult};
use serde::Serialize;

const THREADS_ENV: &str = "CLUSTER_SENSE_THREADS";

#[derive(Parser)]
#[command(
    name = "cluster-sense",
    version,
    about = "Irrelevant-feature sensitivity sweeps for k-means"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a Dimsets-like dataset (data and label files).
    Generate {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        dims: u32,
        #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..))]
        clusters: u32,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
        per_cluster: u32,
        #[arg(long, default_value_t = DEFAULT_SEPARATION, value_parser = positive_real)]
        separation: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a sweep described by a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-repeat metric values to raw.csv.
        #[arg(long)]
        raw: bool,
    },
    /// Render SVG panels from a summary CSV.
    Report {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn positive_real(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

#[derive(Serialize)]
struct EmittedFile {
    kind: &'static str,
    path: PathBuf,
}

#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    created_unix: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    config_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary_path: Option<PathBuf>,
    output_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<String>,
    emitted_files: Vec<EmittedFile>,
}

impl RunManifest {
    fn new(output_dir: &Path) -> Self {
        RunManifest {
            tool: "cluster-sense",
            version: env!("CARGO_PKG_VERSION"),
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            config_path: None,
            summary_path: None,
            output_dir: output_dir.to_path_buf(),
            config: None,
            emitted_files: Vec::new(),
        }
    }

    fn emit(&mut self, kind: &'static str, path: PathBuf) {
        self.emitted_files.push(EmittedFile { kind, path });
    }

    /// Writes `manifest.json`; called after every other output exists.
    fn finish(mut self) -> Result<()> {
        let path = self.output_dir.join("manifest.json");
        self.emit("manifest", path.clone());
        let text = serde_json::to_string_pretty(&self)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

fn thread_pool() -> std::result::Result<rayon::ThreadPool, Failure> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Runtime(e.into()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn generate(dims: u32, clusters: u32, per_cluster: u32, separation: f64, seed: u64, out: &Path) -> Result<()> {
    let data = generate_dim_like(dims as usize, clusters as usize, per_cluster as usize, separation, seed)?;
    create_dir(out)?;
    let stem = format!("dim{dims:03}");
    let data_path = out.join(format!("{stem}.txt"));
    let labels_path = out.join(format!("{stem}.pa"));
    cluster_sense::dataset::write_dataset(&data, &data_path, &labels_path)?;
    println!("{}", data_path.display());
    println!("{}", labels_path.display());
    Ok(())
}

fn warn_degraded(result: &SweepResult) {
    for cell in result.cells.iter().filter(|c| !c.status.is_ok()) {
        eprintln!(
            "warning: {} {} {} ratio {}: {}",
            cell.dataset,
            cell.noise,
            cell.scaling,
            cell.ratio(),
            cell.message.as_deref().unwrap_or("failed")
        );
    }
}

fn run(config_path: &Path, out: &Path, raw: bool) -> std::result::Result<(), Failure> {
    let pool = thread_pool()?;
    let mut config = load_config(config_path).with_context(|| format!("loading {}", config_path.display()))?;
    config.retain_raw = raw;
    let result = pool.install(|| run_sweep(&config)).context("running sweep")?;
    warn_degraded(&result);

    create_dir(out)?;
    let mut manifest = RunManifest::new(out);
    manifest.config_path = Some(config_path.to_path_buf());
    manifest.config = Some(result.provenance.config.clone());

    let summary_path = out.join("summary.csv");
    write_csv(&summary_path, |w| write_summary_csv(&result.rows(), w))?;
    manifest.emit("summary_csv", summary_path);
    if raw {
        let raw_path = out.join("raw.csv");
        write_csv(&raw_path, |w| write_raw_csv(&result.raw, w))?;
        manifest.emit("raw_csv", raw_path);
    }
    manifest.finish()?;
    Ok(())
}

fn write_csv(path: &Path, write: impl FnOnce(BufWriter<fs::File>) -> cluster_sense::Result<()>) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write(BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))
}

fn report(summary: &Path, out: &Path) -> Result<()> {
    let file = fs::File::open(summary).with_context(|| format!("opening {}", summary.display()))?;
    let rows = read_summary_csv(file).with_context(|| format!("reading {}", summary.display()))?;
    let panels = render_panels(&rows)?;
    create_dir(out)?;
    let mut manifest = RunManifest::new(out);
    manifest.summary_path = Some(summary.to_path_buf());
    for panel in panels {
        let path = out.join(&panel.file_name);
        fs::write(&path, panel.svg).with_context(|| format!("writing {}", path.display()))?;
        manifest.emit("svg_panel", path);
    }
    manifest.finish()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate {
            dims,
            clusters,
            per_cluster,
            separation,
            seed,
            out,
        } => generate(dims, clusters, per_cluster, separation, seed, &out).map_err(Failure::from),
        Command::Run { config, out, raw } => run(&config, &out, raw),
        Command::Report { summary, out } => report(&summary, &out).map_err(Failure::from),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
