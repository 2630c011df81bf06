//! Command-line surface: argument definitions and the data, tree and query
//! subcommands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcl_core::domain::{sample_dataset, sample_stream};
use mcl_core::io::{point_from_hex, point_to_hex, read_any, write_binary, write_text};
use mcl_core::rng::Stream;
use mcl_core::tree::{decode_tree, encode_tree, linear_nn, linear_scan, validate_tree};
use mcl_core::{
    build, BuildParams, Dataset, DomainKind, DomainSpec, MetricTree, NnSchedule, Point, RangeQuery,
    Strategy,
};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::experiments::run_with_threads;
use crate::report::report;

#[derive(Debug, Parser)]
#[command(
    name = "mcl",
    version,
    about = "Exact metric-tree search and curse-of-dimensionality experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Random seed (overrides the config file and MCL_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a dataset from a domain.
    GenData(GenDataArgs),
    /// Build a metric tree over a dataset file.
    Build(BuildArgs),
    /// Run range or nearest-neighbour queries against a tree.
    Query(QueryArgs),
    /// Run an experiment described by a config file.
    Run { config: PathBuf },
    /// Summarize and re-check an artifact directory.
    Report { dir: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DataFormat {
    Text,
    Binary,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long, default_value = "hamming")]
    pub domain: DomainKind,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub n: usize,
    /// Defaults to binary for `.bin` files, text otherwise.
    #[arg(long)]
    pub format: Option<DataFormat>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "vp")]
    pub strategy: Strategy,
    #[arg(long, default_value_t = BuildParams::default().bin_capacity)]
    pub bin_capacity: usize,
    #[arg(long, default_value_t = BuildParams::default().candidates)]
    pub candidates: usize,
    #[arg(long, default_value_t = BuildParams::default().max_depth)]
    pub max_depth: usize,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub tree: PathBuf,
    /// Range query radius; without it queries are nearest-neighbour.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Query point: hex bits for Hamming data, comma-separated reals otherwise.
    #[arg(long, conflicts_with = "queries")]
    pub point: Vec<String>,
    /// Number of query points sampled from the domain.
    #[arg(long, default_value_t = 10)]
    pub queries: usize,
    /// Replay every query against a linear scan; exit 1 on any difference.
    #[arg(long)]
    pub check: bool,
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

pub fn load_dataset(path: &Path) -> CliResult<Dataset> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    read_any(&bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn load_tree(path: &Path) -> CliResult<MetricTree> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_tree(&bytes[..]).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn gen_data(args: &GenDataArgs, seed: u64, out: Option<&Path>) -> CliResult<()> {
    let spec = DomainSpec::new(args.domain, args.dim).map_err(|e| usage(format!("--dim: {e}")))?;
    let data = sample_dataset(&spec, seed, args.n);
    let format = args.format.unwrap_or(match out {
        Some(p) if p.extension().is_some_and(|e| e == "bin") => DataFormat::Binary,
        _ => DataFormat::Text,
    });
    match out {
        Some(path) => {
            let mut w = create(path)?;
            match format {
                DataFormat::Text => write_text(&data, &mut w)?,
                DataFormat::Binary => write_binary(&data, &mut w)?,
            }
            w.flush().map_err(|e| CliError::io(path, e))?;
            eprintln!(
                "wrote {} points of {spec} to {}",
                data.len(),
                path.display()
            );
        }
        None => {
            if format == DataFormat::Binary {
                return Err(usage("binary output needs --out"));
            }
            write_text(&data, std::io::stdout().lock())?;
        }
    }
    Ok(())
}

fn build_tree(args: &BuildArgs, seed: u64, out: Option<&Path>) -> CliResult<()> {
    let out = out.ok_or_else(|| usage("build needs --out <tree file>"))?;
    let data = load_dataset(&args.data)?;
    let params = BuildParams {
        bin_capacity: args.bin_capacity,
        candidates: args.candidates,
        max_depth: args.max_depth,
    };
    params.validate().map_err(|e| usage(e.to_string()))?;
    let tree = build(&data, args.strategy, params, seed)?;
    let v = validate_tree(&tree, &data);
    if !v.ok {
        return Err(CliError::Assertion(
            v.violations.iter().map(|x| x.to_string()).collect(),
        ));
    }
    let mut w = create(out)?;
    encode_tree(&tree, &mut w)?;
    w.flush().map_err(|e| CliError::io(out, e))?;
    eprintln!(
        "{} tree over {} points: {} leaves, depth {}",
        tree.strategy(),
        tree.len(),
        tree.leaf_count(),
        tree.depth()
    );
    Ok(())
}

fn parse_point(spec: &DomainSpec, s: &str) -> CliResult<Point> {
    let p = if spec.kind == DomainKind::Hamming {
        point_from_hex(s.trim(), spec.dim)?
    } else {
        Point::Real(
            s.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| usage(format!("--point: bad number {v:?}")))
                })
                .collect::<CliResult<_>>()?,
        )
    };
    spec.check(&p).map_err(|e| usage(format!("--point: {e}")))?;
    Ok(p)
}

fn format_point(p: &Point) -> String {
    match p {
        Point::Bits { .. } => point_to_hex(p),
        Point::Real(v) => v
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" "),
    }
}

fn query(args: &QueryArgs, seed: u64, out: Option<&Path>) -> CliResult<()> {
    let data = load_dataset(&args.data)?;
    let tree = load_tree(&args.tree)?;
    if tree.spec() != &data.spec || tree.len() != data.len() {
        return Err(usage(format!(
            "tree ({}, {} points) does not index this dataset ({}, {} points)",
            tree.spec(),
            tree.len(),
            data.spec,
            data.len()
        )));
    }
    let centers = if args.point.is_empty() {
        sample_stream(&data.spec, seed, Stream::Queries, args.queries)
    } else {
        args.point
            .iter()
            .map(|s| parse_point(&data.spec, s))
            .collect::<CliResult<_>>()?
    };

    let mut w: Box<dyn Write> = match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut mismatches = Vec::new();
    let werr = |e| CliError::io(out.unwrap_or(Path::new("<stdout>")), e);
    match args.radius {
        Some(r) => {
            writeln!(w, "query,center,radius,matches,cost,bins_opened,indices").map_err(werr)?;
            for (i, c) in centers.iter().enumerate() {
                let q =
                    RangeQuery::new(c.clone(), r).map_err(|e| usage(format!("--radius: {e}")))?;
                let (m, t) = tree.range_search(&data, &q)?;
                if args.check && m != linear_scan(&data, &q) {
                    mismatches.push(format!("query {i}: range result differs from linear scan"));
                }
                let idx = m
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                writeln!(
                    w,
                    "{i},{},{r},{},{},{},{idx}",
                    format_point(c),
                    m.len(),
                    t.cost(),
                    t.bins_opened
                )
                .map_err(werr)?;
            }
        }
        None => {
            writeln!(w, "query,center,nn,distance,rounds,cost,bins_opened").map_err(werr)?;
            for (i, c) in centers.iter().enumerate() {
                let r = tree.nn_search(&data, c, &NnSchedule::default())?;
                if args.check && linear_nn(&data, c) != Some((r.index, r.distance)) {
                    mismatches.push(format!(
                        "query {i}: nearest neighbour differs from linear scan"
                    ));
                }
                writeln!(
                    w,
                    "{i},{},{},{},{},{},{}",
                    format_point(c),
                    r.index,
                    r.distance,
                    r.rounds,
                    r.trace.cost(),
                    r.final_trace.bins_opened
                )
                .map_err(werr)?;
            }
        }
    }
    w.flush().map_err(werr)?;
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(mismatches))
    }
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> CliResult<()> {
    let seed = cli.seed.unwrap_or(0);
    let out = cli.out.as_deref();
    match &cli.command {
        Command::GenData(a) => gen_data(a, seed, out),
        Command::Build(a) => build_tree(a, seed, out),
        Command::Query(a) => query(a, seed, out),
        Command::Run { config } => {
            let mut cfg = ExperimentConfig::load(config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let dir = out
                .map(Path::to_path_buf)
                .or_else(|| cfg.out.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.as_str()));
            let result = run_with_threads(&cfg, &dir, cli.threads.map(|t| t as usize));
            match &result {
                Ok(r) => eprintln!(
                    "wrote {} to {}",
                    r.meta.artifacts.join(", "),
                    r.dir.display()
                ),
                Err(CliError::Assertion(_)) => eprintln!("artifacts written to {}", dir.display()),
                Err(_) => {}
            }
            result.map(|_| ())
        }
        Command::Report { dir } => {
            let r = report(dir)?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", r.text);
            if r.failures.is_empty() {
                println!("all checks passed");
                Ok(())
            } else {
                Err(CliError::Assertion(r.failures))
            }
        }
    }
}
