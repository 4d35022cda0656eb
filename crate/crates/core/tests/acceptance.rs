//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use cluster_sense::kmeans::{fit, KMeansConfig};
use cluster_sense::metrics::{adjusted_rand_index, davies_bouldin, nmi, rand_index, silhouette, PartitionPair};
use cluster_sense::report::write_summary_csv;
use cluster_sense::seeding::rng_from_seed;
use cluster_sense::{
    apply_scaling, generate_dim_like, run_sweep, summarize_tipping, DatasetSource, Metric, NoiseKind, RatioStep,
    ScalingKind, SummaryRow, SweepConfig, SweepResult,
};
use common::*;
use rand::Rng;

const SEPARATION: f64 = 10.0;
const DATA_SEED: u64 = 7;
const DIMS: [usize; 4] = [32, 64, 128, 256];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sweep_config(dims: &[usize], noise: &[NoiseKind], scalings: &[ScalingKind], repeats: usize) -> SweepConfig {
    SweepConfig {
        datasets: dims
            .iter()
            .map(|&d| DatasetSource::dim_like(d, SEPARATION, DATA_SEED))
            .collect(),
        noise_kinds: noise.to_vec(),
        scalings: scalings.to_vec(),
        max_ratio: 3.0,
        ratio_step: RatioStep::PerFeatures(8),
        repeats,
        master_seed: 0,
        ..SweepConfig::default()
    }
}

/// Sorted (ratio, mean, std) samples of one curve.
fn curve(
    rows: &[SummaryRow],
    dataset: &str,
    noise: NoiseKind,
    scaling: ScalingKind,
    metric: Metric,
) -> Vec<(f64, f64, f64)> {
    let mut points: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|r| r.dataset == dataset && r.noise == noise && r.scaling == scaling && r.metric == metric)
        .map(|r| (r.ratio, r.mean, r.std))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points
}

fn at(points: &[(f64, f64, f64)], ratio: f64) -> (f64, f64) {
    let p = points
        .iter()
        .find(|p| (p.0 - ratio).abs() < 1e-12)
        .expect("ratio sampled");
    (p.1, p.2)
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(1);
    let mut worst = 0.0f64;
    let mut exact = true;
    for _ in 0..200 {
        let n = rng.random_range(4..=60);
        let kx = rng.random_range(2..=6);
        let ky = rng.random_range(1..=6);
        let x = random_labels_multi(&mut rng, n, kx);
        let y = random_labels(&mut rng, n, ky);
        let pair = PartitionPair::new(&x, &y).unwrap();
        exact &= rand_index(&pair).unwrap() == rand_index_oracle(&x, &y);
        exact &= adjusted_rand_index(&pair).unwrap() == ari_oracle(&x, &y);
        worst = worst.max((nmi(&pair) - nmi_oracle(&x, &y)).abs());
        let m = random_matrix(&mut rng, n, 3);
        worst = worst.max((silhouette(&m, &x).unwrap() - silhouette_oracle(&m, &x)).abs());
        worst = worst.max((davies_bouldin(&m, &x).unwrap() - davies_bouldin_oracle(&m, &x)).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        exact && worst < 1e-12 && elapsed < Duration::from_secs(10),
        format!("RI/ARI exact: {exact}, max NMI/S/DB deviation {worst:.2e}, {elapsed:.2?}"),
    )
}

fn ari_adjustment() -> Outcome {
    let mut rng = rng_from_seed(2);
    let mean = (0..1000)
        .map(|_| {
            let x = random_labels(&mut rng, 100, 4);
            let y = random_labels(&mut rng, 100, 4);
            adjusted_rand_index(&PartitionPair::new(&x, &y).unwrap()).unwrap()
        })
        .sum::<f64>()
        / 1000.0;
    outcome(mean.abs() < 0.02, format!("mean ARI of random labelings {mean:.5}"))
}

fn baseline_quality() -> Outcome {
    let start = Instant::now();
    let data = generate_dim_like(32, 16, 64, SEPARATION, DATA_SEED).unwrap();
    let m = apply_scaling(data.points(), ScalingKind::Standardized).unwrap();
    let best = (0..10)
        .map(|seed| fit(&m, &KMeansConfig::new(16, seed)).unwrap())
        .min_by(|a, b| a.inertia.total_cmp(&b.inertia))
        .unwrap();
    let pair = PartitionPair::new(&best.assignments, data.labels()).unwrap();
    let ari = adjusted_rand_index(&pair).unwrap();
    let n = nmi(&pair);
    let elapsed = start.elapsed();
    outcome(
        ari >= 0.99 && n >= 0.99 && elapsed < Duration::from_secs(30),
        format!("best-of-10 ARI {ari:.4}, NMI {n:.4}, {elapsed:.2?}"),
    )
}

fn gaussian_resilience(shared: &[SummaryRow]) -> Outcome {
    let start = Instant::now();
    let cfg = SweepConfig {
        n_init: 10,
        ..sweep_config(&[64, 128, 256], &[NoiseKind::Gaussian], &[ScalingKind::None], 10)
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let result = pool.install(|| run_sweep(&cfg)).unwrap();
    let elapsed = start.elapsed();
    let rows = result.rows();
    let mut pass = elapsed < Duration::from_secs(600);
    let mut parts = Vec::new();
    for d in [64, 128, 256] {
        let name = format!("dim-{d}");
        let ari = at(
            &curve(&rows, &name, NoiseKind::Gaussian, ScalingKind::None, Metric::Ari),
            3.0,
        )
        .0;
        let n = at(
            &curve(&rows, &name, NoiseKind::Gaussian, ScalingKind::None, Metric::Nmi),
            3.0,
        )
        .0;
        let single = at(
            &curve(shared, &name, NoiseKind::Gaussian, ScalingKind::None, Metric::Ari),
            3.0,
        )
        .0;
        pass &= ari >= 0.9 && n >= 0.9;
        parts.push(format!("{name} ARI {ari:.3} NMI {n:.3} (single init ARI {single:.3})"));
    }
    outcome(
        pass,
        format!(
            "at 3:1 with 10 initializations: {}; {elapsed:.1?} single-worker",
            parts.join(", ")
        ),
    )
}

fn uniform_tipping(shared: &[SummaryRow]) -> Outcome {
    let ari32 = curve(shared, "dim-32", NoiseKind::Uniform, ScalingKind::None, Metric::Ari);
    let collapse = ari32.iter().find(|p| p.0 <= 3.0 && p.1 < 0.2).map(|p| p.0);
    let tips = summarize_tipping(shared, Metric::Ari, 0.2).unwrap();
    let tip = |name: &str| {
        tips.iter()
            .find(|t| t.dataset == name && t.noise == NoiseKind::Uniform && t.scaling == ScalingKind::None)
            .and_then(|t| t.ratio)
    };
    let (t32, t256) = (tip("dim-32"), tip("dim-256"));
    // a curve that never tips within the sampled range ranks above any tipping ratio
    let earlier = match (t32, t256) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    };
    outcome(
        collapse.is_some() && earlier,
        format!("dim-32 first ARI < 0.2 at {collapse:?}; tipping ratio dim-32 {t32:?} vs dim-256 {t256:?}"),
    )
}

/// Largest number of adjacent-sample reversals of silhouette and DB over all curves.
fn reversals(rows: &[SummaryRow], datasets: &[&str], noise: &[NoiseKind], scalings: &[ScalingKind]) -> (usize, usize) {
    let mut worst = (0, 0);
    for ds in datasets {
        for &n in noise {
            for &sc in scalings {
                let s = curve(rows, ds, n, sc, Metric::Silhouette);
                let db = curve(rows, ds, n, sc, Metric::DaviesBouldin);
                worst.0 = worst.0.max(s.windows(2).filter(|w| w[1].1 > w[0].1).count());
                worst.1 = worst.1.max(db.windows(2).filter(|w| w[1].1 < w[0].1).count());
            }
        }
    }
    worst
}

fn internal_sensitivity(shared: &[SummaryRow], shared_cfg: &SweepConfig) -> Outcome {
    let start = Instant::now();
    let cfg = SweepConfig {
        ratio_step: RatioStep::PerFeatures(2),
        ..sweep_config(&DIMS, &NoiseKind::ALL, &ScalingKind::ALL, 50)
    };
    let rows = run_sweep(&cfg).unwrap().rows();
    let mut failures = Vec::new();
    let mut curves = 0;
    for d in DIMS {
        let ds = format!("dim-{d}");
        for &noise in &cfg.noise_kinds {
            for &scaling in &cfg.scalings {
                curves += 1;
                let s = curve(&rows, &ds, noise, scaling, Metric::Silhouette);
                let db = curve(&rows, &ds, noise, scaling, Metric::DaviesBouldin);
                let (s0, s_half, s3) = (at(&s, 0.0).0, at(&s, 0.5).0, at(&s, 3.0).0);
                let (db0, db3) = (at(&db, 0.0).0, at(&db, 3.0).0);
                let early = s0 - s_half >= 0.25 * (s0 - s3);
                let s_violations = s.windows(2).filter(|w| w[1].1 > w[0].1).count();
                let db_violations = db.windows(2).filter(|w| w[1].1 < w[0].1).count();
                if !(early && db3 > db0 && s_violations <= 1 && db_violations <= 1) {
                    failures.push(format!(
                        "{ds}/{noise}/{scaling}: S {s0:.3}->{s_half:.3}->{s3:.3}, DB {db0:.3}->{db3:.3}, \
                         reversals S {s_violations} DB {db_violations}"
                    ));
                }
            }
        }
    }
    let names: Vec<String> = DIMS.iter().map(|d| format!("dim-{d}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let (fine_s, fine_db) = reversals(shared, &names, &shared_cfg.noise_kinds, &shared_cfg.scalings);
    let summary = format!(
        "{curves} curves at 0.5:1 spacing, 50 repeats, {:.1?}; on the D/8 grid with 10 repeats: \
         up to {fine_s} silhouette and {fine_db} DB reversals per curve",
        start.elapsed()
    );
    if failures.is_empty() {
        outcome(
            true,
            format!("{summary}; silhouette front-loaded and monotone, DB rising"),
        )
    } else {
        outcome(false, format!("{summary}; {}", failures.join("; ")))
    }
}

fn standardization_equivalence(shared: &[SummaryRow]) -> Outcome {
    let mut worst: Option<(String, f64)> = None;
    for d in DIMS {
        let ds = &format!("dim-{d}");
        for metric in Metric::ALL {
            let g = curve(shared, ds, NoiseKind::Gaussian, ScalingKind::Standardized, metric);
            let u = curve(shared, ds, NoiseKind::Uniform, ScalingKind::Standardized, metric);
            assert_eq!(g.len(), u.len());
            // identical means (the shared ratio-0 baseline) count as agreeing
            let agree = g
                .iter()
                .zip(&u)
                .filter(|(a, b)| a.1 == b.1 || (a.1 - b.1).abs() < 2.0 * (a.2 + b.2))
                .count();
            let share = agree as f64 / g.len() as f64;
            if worst.as_ref().is_none_or(|w| share < w.1) {
                worst = Some((format!("{ds}/{metric}"), share));
            }
        }
    }
    let (name, share) = worst.unwrap();
    outcome(
        share >= 0.95,
        format!("lowest agreement share {:.1}% ({name})", share * 100.0),
    )
}

fn summary_bytes(result: &SweepResult) -> Vec<u8> {
    let mut buf = Vec::new();
    write_summary_csv(&result.rows(), &mut buf).unwrap();
    buf
}

fn determinism() -> Outcome {
    let cfg = sweep_config(&[32], &NoiseKind::ALL, &ScalingKind::ALL, 3);
    let runs: Vec<Vec<u8>> = [1, 4, 0]
        .into_iter()
        .map(|threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            summary_bytes(&pool.install(|| run_sweep(&cfg)).unwrap())
        })
        .collect();
    let same = runs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "summary CSV ({} bytes) identical with 1, 4 and default workers",
            runs[0].len()
        ),
    )
}

fn main() {
    let shared_cfg = sweep_config(
        &DIMS,
        &NoiseKind::ALL,
        &[ScalingKind::None, ScalingKind::Standardized],
        10,
    );
    let start = Instant::now();
    let shared = run_sweep(&shared_cfg).expect("shared sweep").rows();
    eprintln!("shared sweep finished in {:.1?}", start.elapsed());

    let results = [
        ("metric oracles", metric_oracles()),
        ("ARI adjustment", ari_adjustment()),
        ("baseline quality", baseline_quality()),
        ("Gaussian resilience", gaussian_resilience(&shared)),
        ("Uniform tipping point", uniform_tipping(&shared)),
        (
            "internal-metric sensitivity",
            internal_sensitivity(&shared, &shared_cfg),
        ),
        ("standardization equivalence", standardization_equivalence(&shared)),
        ("determinism", determinism()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "{} criterion {} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        failed += !o.pass as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
