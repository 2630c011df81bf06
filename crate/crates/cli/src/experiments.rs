//! Experiment runners. Each writes its artifacts plus `meta.json` into the
//! output directory and returns the invariant violations it detected.

use std::fs;
use std::path::{Path, PathBuf};

use mcl_core::concentration::{
    chernoff_curve, continuous_grid, empirical_alpha_lower, halfcube_curve, hamming_grid,
    nn_radius_stats, AlphaRow, NnRadiusRow,
};
use mcl_core::domain::{sample_dataset, sample_stream};
use mcl_core::rng::Stream;
use mcl_core::tree::{linear_nn, linear_scan, validate_tree};
use mcl_core::{build, DomainKind, DomainSpec, RangeQuery, Strategy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind, QueryMode};
use crate::error::{CliError, CliResult};
use crate::vc_demo;

pub const META_FILE: &str = "meta.json";
pub const CURSE_FILE: &str = "curse.csv";
pub const BENCH_FILE: &str = "bench.csv";
pub const ALPHA_FILE: &str = "alpha.csv";
pub const NN_RADIUS_FILE: &str = "nnradius.csv";
pub const VC_FILE: &str = "vc-report.json";

/// Contents of `meta.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub artifacts: Vec<String>,
    pub violations: Vec<String>,
    pub config: serde_json::Value,
}

/// One row of `curse.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: usize,
    pub n: usize,
    pub strategy: String,
    pub mean_cost: f64,
    pub mean_bins_opened: f64,
    pub leaf_count: usize,
    pub fraction_opened: f64,
    pub linear_cost: usize,
    pub speedup: f64,
    pub oracle_checked: usize,
    pub seed: u64,
}

/// One row of `bench.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub d: usize,
    pub n: usize,
    pub strategy: String,
    pub mode: String,
    pub radius: f64,
    pub queries: usize,
    pub mean_cost: f64,
    pub mean_decision_evals: f64,
    pub mean_distance_computations: f64,
    pub mean_bins_opened: f64,
    pub mean_result_size: f64,
    pub leaf_count: usize,
    pub depth: usize,
    pub linear_cost: usize,
    pub speedup: f64,
    pub oracle_checked: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub meta: Meta,
}

/// Integer totals over one workload.
#[derive(Clone, Debug, Default)]
struct Totals {
    queries: u64,
    cost: u64,
    decision_evals: u64,
    distance_computations: u64,
    bins: u64,
    results: u64,
    checked: usize,
}

struct Measurement {
    n: usize,
    leaf_count: usize,
    depth: usize,
    totals: Totals,
}

impl Measurement {
    fn mean(&self, v: u64) -> f64 {
        v as f64 / self.totals.queries as f64
    }
}

fn measure(
    cfg: &ExperimentConfig,
    spec: &DomainSpec,
    strategy: Strategy,
    violations: &mut Vec<String>,
) -> CliResult<Measurement> {
    let seed = cfg.seed;
    let n = cfg.data.n_for(spec.dim)?;
    let data = sample_dataset(spec, seed, n);
    let tree = build(&data, strategy, cfg.tree.params(), seed)?;
    let report = validate_tree(&tree, &data);
    let tag = format!("{spec} {strategy}");
    for v in report.violations.iter().take(5) {
        violations.push(format!("{tag}: invalid tree: {v}"));
    }

    let centers = sample_stream(spec, seed, Stream::Queries, cfg.queries.count);
    let stride = cfg.queries.oracle_stride();
    let schedule = cfg.queries.schedule();
    let mode = cfg.queries.mode;
    let radius = cfg.queries.radius;

    type PerQuery = (mcl_core::SearchTrace, u64, bool, Option<String>);
    let per_query: Vec<CliResult<PerQuery>> = centers
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let replay = stride.is_some_and(|s| i % s == 0);
            match mode {
                QueryMode::Nn => {
                    let r = tree.nn_search(&data, w, &schedule)?;
                    let mut bad = None;
                    if replay {
                        let truth = linear_nn(&data, w);
                        let confirm = RangeQuery::new(w.clone(), r.distance.next_up())?;
                        let (m, _) = tree.range_search(&data, &confirm)?;
                        if truth != Some((r.index, r.distance)) || m != linear_scan(&data, &confirm) {
                            bad = Some(format!(
                                "{tag}: query {i}: tree nn ({}, {}) differs from linear scan {truth:?}",
                                r.index, r.distance
                            ));
                        }
                    }
                    let mut trace = r.trace;
                    trace.bins_opened = r.final_trace.bins_opened;
                    Ok((trace, 1, replay, bad))
                }
                QueryMode::Range => {
                    let q = RangeQuery::new(w.clone(), radius)?;
                    let (m, trace) = tree.range_search(&data, &q)?;
                    let bad = (replay && m != linear_scan(&data, &q))
                        .then(|| format!("{tag}: query {i}: range result differs from linear scan"));
                    Ok((trace, m.len() as u64, replay, bad))
                }
            }
        })
        .collect();

    let mut totals = Totals::default();
    for r in per_query {
        let (trace, results, replayed, bad) = r?;
        totals.queries += 1;
        totals.cost += trace.cost();
        totals.decision_evals += trace.decision_evals;
        totals.distance_computations += trace.distance_computations;
        totals.bins += trace.bins_opened;
        totals.results += results;
        totals.checked += replayed as usize;
        violations.extend(bad);
    }
    Ok(Measurement {
        n,
        leaf_count: tree.leaf_count(),
        depth: tree.depth(),
        totals,
    })
}

fn check_row(violations: &mut Vec<String>, tag: String, fraction: f64, speedup: f64) {
    if !(0.0..=1.0).contains(&fraction) {
        violations.push(format!(
            "{tag}: fraction of leaves opened {fraction} outside [0, 1]"
        ));
    }
    if speedup.is_nan() || speedup <= 0.0 {
        violations.push(format!("{tag}: speedup {speedup} is not positive"));
    }
}

fn curse_sweep(cfg: &ExperimentConfig, violations: &mut Vec<String>) -> CliResult<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for spec in cfg.specs()? {
        for &strategy in &cfg.tree.strategies {
            let m = measure(cfg, &spec, strategy, violations)?;
            let mean_cost = m.mean(m.totals.cost);
            let mean_bins = m.mean(m.totals.bins);
            let fraction = mean_bins / m.leaf_count as f64;
            let speedup = m.n as f64 / mean_cost;
            check_row(violations, format!("{spec} {strategy}"), fraction, speedup);
            rows.push(SweepRow {
                d: spec.dim,
                n: m.n,
                strategy: strategy.to_string(),
                mean_cost,
                mean_bins_opened: mean_bins,
                leaf_count: m.leaf_count,
                fraction_opened: fraction,
                linear_cost: m.n,
                speedup,
                oracle_checked: m.totals.checked,
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}

fn bench(cfg: &ExperimentConfig, violations: &mut Vec<String>) -> CliResult<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for spec in cfg.specs()? {
        for &strategy in &cfg.tree.strategies {
            let m = measure(cfg, &spec, strategy, violations)?;
            let mean_cost = m.mean(m.totals.cost);
            let mean_bins = m.mean(m.totals.bins);
            let speedup = m.n as f64 / mean_cost;
            check_row(
                violations,
                format!("{spec} {strategy}"),
                mean_bins / m.leaf_count as f64,
                speedup,
            );
            let (mode, radius) = match cfg.queries.mode {
                QueryMode::Nn => ("nn", 0.0),
                QueryMode::Range => ("range", cfg.queries.radius),
            };
            rows.push(BenchRow {
                d: spec.dim,
                n: m.n,
                strategy: strategy.to_string(),
                mode: mode.into(),
                radius,
                queries: m.totals.queries as usize,
                mean_cost,
                mean_decision_evals: m.mean(m.totals.decision_evals),
                mean_distance_computations: m.mean(m.totals.distance_computations),
                mean_bins_opened: mean_bins,
                mean_result_size: m.mean(m.totals.results),
                leaf_count: m.leaf_count,
                depth: m.depth,
                linear_cost: m.n,
                speedup,
                oracle_checked: m.totals.checked,
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}

fn concentration(cfg: &ExperimentConfig, violations: &mut Vec<String>) -> CliResult<Vec<AlphaRow>> {
    let mut rows = Vec::new();
    let c = &cfg.concentration;
    for spec in cfg.specs()? {
        let d = spec.dim;
        if spec.kind == DomainKind::Hamming {
            let grid = hamming_grid(d, c.t_max.unwrap_or(3 * d / 10).max(1));
            let bound = chernoff_curve(d, &grid)?;
            let exact = halfcube_curve(d, &grid)?;
            for ((e, b), x) in grid.iter().zip(&bound.alpha).zip(&exact.alpha) {
                if x > b {
                    violations.push(format!(
                        "d={d} eps={e}: exact half-cube value {x} exceeds bound {b}"
                    ));
                }
            }
            rows.extend(bound.rows());
            rows.extend(exact.rows());
            rows.extend(empirical_alpha_lower(&spec, cfg.seed, c.samples, &grid)?.rows());
        } else {
            let grid = continuous_grid(c.eps_max);
            rows.extend(empirical_alpha_lower(&spec, cfg.seed, c.samples, &grid)?.rows());
        }
    }
    for r in &rows {
        if !(0.0..=1.0).contains(&r.value) {
            violations.push(format!(
                "d={} eps={} {}: value {} outside [0, 1]",
                r.d, r.eps, r.method, r.value
            ));
        }
    }
    Ok(rows)
}

fn nn_radius(cfg: &ExperimentConfig, violations: &mut Vec<String>) -> CliResult<Vec<NnRadiusRow>> {
    let mut rows = Vec::new();
    for spec in cfg.specs()? {
        let n = cfg.data.n_for(spec.dim)?;
        let s = nn_radius_stats(&spec, n, cfg.queries.count, cfg.seed)?;
        if !(s.p10 <= s.median && s.median <= s.p90) {
            violations.push(format!("{spec}: quantiles out of order"));
        }
        if s.occupancy < 1.0 {
            violations.push(format!("{spec}: occupancy {} below 1", s.occupancy));
        }
        rows.push(s.row());
    }
    Ok(rows)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Artifact {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable artifact");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Runs one experiment into `out`, creating the directory if needed.
///
/// Artifacts are written even when invariants fail; the failures are then
/// returned as [`CliError::Assertion`].
pub fn run(cfg: &ExperimentConfig, out: &Path) -> CliResult<RunOutput> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut violations = Vec::new();
    let artifact = match cfg.experiment {
        ExperimentKind::CurseSweep => {
            write_csv(&out.join(CURSE_FILE), &curse_sweep(cfg, &mut violations)?)?;
            CURSE_FILE
        }
        ExperimentKind::Bench => {
            write_csv(&out.join(BENCH_FILE), &bench(cfg, &mut violations)?)?;
            BENCH_FILE
        }
        ExperimentKind::Concentration => {
            write_csv(&out.join(ALPHA_FILE), &concentration(cfg, &mut violations)?)?;
            ALPHA_FILE
        }
        ExperimentKind::NnRadius => {
            write_csv(&out.join(NN_RADIUS_FILE), &nn_radius(cfg, &mut violations)?)?;
            NN_RADIUS_FILE
        }
        ExperimentKind::VcDemo => {
            let report = vc_demo::run(cfg)?;
            violations.extend(
                report
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| format!("{}: {}", c.name, c.detail)),
            );
            write_json(&out.join(VC_FILE), &report)?;
            VC_FILE
        }
    };
    let meta = Meta {
        tool: "mcl".into(),
        version: mcl_core::VERSION.into(),
        experiment: cfg.experiment,
        seed: cfg.seed,
        artifacts: vec![artifact.into()],
        violations: violations.clone(),
        config: serde_json::to_value(cfg).expect("serializable config"),
    };
    write_json(&out.join(META_FILE), &meta)?;
    if violations.is_empty() {
        Ok(RunOutput {
            dir: out.to_path_buf(),
            meta,
        })
    } else {
        Err(CliError::Assertion(violations))
    }
}

/// [`run`] on a dedicated thread pool. `None` uses rayon's default size.
pub fn run_with_threads(
    cfg: &ExperimentConfig,
    out: &Path,
    threads: Option<usize>,
) -> CliResult<RunOutput> {
    match threads {
        None => run(cfg, out),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?
            .install(|| run(cfg, out)),
    }
}
