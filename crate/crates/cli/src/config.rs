//! Experiment configuration, read from a TOML file.
//!
//! ```toml
//! experiment = "curse_sweep"
//! seed = 7
//!
//! [domain]
//! kind = "hamming"
//! dims = [16, 32, 64, 128]
//!
//! [data]
//! rule = "fixed"
//! n = 4096
//!
//! [tree]
//! strategies = ["vp"]
//! bin_capacity = 16
//!
//! [queries]
//! count = 500
//! mode = "nn"
//! ```

use std::path::{Path, PathBuf};

use mcl_core::{BuildParams, DomainKind, DomainSpec, NnSchedule, Strategy};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "MCL_SEED";

/// Hard ceiling on dataset size.
pub const N_MAX_LIMIT: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CurseSweep,
    Concentration,
    NnRadius,
    VcDemo,
    Bench,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::CurseSweep => "curse_sweep",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::NnRadius => "nn_radius",
            ExperimentKind::VcDemo => "vc_demo",
            ExperimentKind::Bench => "bench",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; the `--out` flag takes precedence.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub tree: TreeSection,
    #[serde(default)]
    pub queries: QuerySection,
    #[serde(default)]
    pub concentration: ConcentrationSection,
    #[serde(default)]
    pub vc: VcSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSection {
    pub kind: DomainKind,
    pub dims: Vec<usize>,
}

impl Default for DomainSection {
    fn default() -> Self {
        DomainSection {
            kind: DomainKind::Hamming,
            dims: vec![16, 32, 64],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NRule {
    /// The same `n` for every dimension.
    Fixed,
    /// `n = 2^ceil(sqrt(d))`, capped at `n_max`.
    Sqrt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub rule: NRule,
    pub n: Option<usize>,
    pub n_max: usize,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            rule: NRule::Fixed,
            n: Some(4096),
            n_max: 1 << 16,
        }
    }
}

/// Smallest `k` with `k * k >= d`.
pub fn ceil_sqrt(d: usize) -> usize {
    let mut k = (d as f64).sqrt() as usize;
    while k * k < d {
        k += 1;
    }
    while k > 0 && (k - 1) * (k - 1) >= d {
        k -= 1;
    }
    k
}

impl DataSection {
    pub fn n_for(&self, d: usize) -> CliResult<usize> {
        let n = match self.rule {
            NRule::Fixed => self.n.ok_or_else(|| {
                CliError::Config("data.n: required when data.rule = \"fixed\"".into())
            })?,
            NRule::Sqrt => {
                let k = ceil_sqrt(d);
                if k >= 63 {
                    self.n_max
                } else {
                    (1usize << k).min(self.n_max)
                }
            }
        };
        if n == 0 {
            return Err(CliError::Config(format!(
                "data.n: rule gives n = 0 at d = {d}"
            )));
        }
        if n > self.n_max {
            return Err(CliError::Config(format!(
                "data.n: {n} exceeds data.n_max = {}",
                self.n_max
            )));
        }
        Ok(n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TreeSection {
    pub strategies: Vec<Strategy>,
    pub bin_capacity: usize,
    pub candidates: usize,
    pub max_depth: usize,
}

impl Default for TreeSection {
    fn default() -> Self {
        let p = BuildParams::default();
        TreeSection {
            strategies: vec![Strategy::Vp],
            bin_capacity: p.bin_capacity,
            candidates: p.candidates,
            max_depth: p.max_depth,
        }
    }
}

impl TreeSection {
    pub fn params(&self) -> BuildParams {
        BuildParams {
            bin_capacity: self.bin_capacity,
            candidates: self.candidates,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    Nn,
    Range,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuerySection {
    pub count: usize,
    pub mode: QueryMode,
    /// Range query radius.
    pub radius: f64,
    pub initial_radius: f64,
    pub growth: f64,
    /// Share of queries replayed against a linear scan.
    pub oracle_fraction: f64,
}

impl Default for QuerySection {
    fn default() -> Self {
        let s = NnSchedule::default();
        QuerySection {
            count: 500,
            mode: QueryMode::Nn,
            radius: 0.2,
            initial_radius: s.initial_radius,
            growth: s.growth,
            oracle_fraction: 0.05,
        }
    }
}

impl QuerySection {
    pub fn schedule(&self) -> NnSchedule {
        NnSchedule {
            initial_radius: self.initial_radius,
            growth: self.growth,
        }
    }

    /// Every `stride`-th query is replayed, `None` when replay is off.
    pub fn oracle_stride(&self) -> Option<usize> {
        (self.oracle_fraction > 0.0).then(|| (1.0 / self.oracle_fraction).round().max(1.0) as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConcentrationSection {
    /// Monte Carlo samples for the empirical lower estimate.
    pub samples: usize,
    /// Largest grid offset on the Hamming cube; defaults to `0.3 d`.
    pub t_max: Option<usize>,
    /// Largest `eps` for continuous domains.
    pub eps_max: f64,
}

impl Default for ConcentrationSection {
    fn default() -> Self {
        ConcentrationSection {
            samples: 20_000,
            t_max: None,
            eps_max: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VcSection {
    /// Random subsets tried per witness search.
    pub trials: usize,
    /// Concept proposals per subset for sampled classes.
    pub budget: usize,
    /// Size of the point sample subsets are drawn from.
    pub sample: usize,
    /// Accuracy and confidence for the empirical-deviation check.
    pub eps: f64,
    pub delta: f64,
    pub deviation_dim: u32,
}

impl Default for VcSection {
    fn default() -> Self {
        VcSection {
            trials: 10_000,
            budget: 2_000,
            sample: 40,
            eps: 0.1,
            delta: 0.05,
            deviation_dim: 16,
        }
    }
}

fn field(name: &str, ok: bool, reason: &str) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name}: {reason}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file, applying `MCL_SEED` if set.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Ok(s) = std::env::var(SEED_ENV) {
            cfg.seed = s.trim().parse().map_err(|_| {
                CliError::Config(format!("{SEED_ENV}: not an unsigned integer: {s:?}"))
            })?;
        }
        Ok(cfg)
    }

    pub fn specs(&self) -> CliResult<Vec<DomainSpec>> {
        self.domain
            .dims
            .iter()
            .map(|&d| {
                DomainSpec::new(self.domain.kind, d)
                    .map_err(|e| CliError::Config(format!("domain.dims: {e}")))
            })
            .collect()
    }

    pub fn validate(&self) -> CliResult<()> {
        field(
            "domain.dims",
            !self.domain.dims.is_empty(),
            "must not be empty",
        )?;
        self.specs()?;
        field(
            "data.n_max",
            self.data.n_max >= 1 && self.data.n_max <= N_MAX_LIMIT,
            "must lie in [1, 2^20]",
        )?;
        let needs_data = !matches!(
            self.experiment,
            ExperimentKind::Concentration | ExperimentKind::VcDemo
        );
        if needs_data {
            for &d in &self.domain.dims {
                self.data.n_for(d)?;
            }
        }
        field(
            "tree.strategies",
            !self.tree.strategies.is_empty(),
            "must not be empty",
        )?;
        self.tree
            .params()
            .validate()
            .map_err(|e| CliError::Config(format!("tree: {e}")))?;
        field(
            "queries.count",
            self.queries.count >= 1,
            "must be at least 1",
        )?;
        field(
            "queries.radius",
            self.queries.radius > 0.0 && self.queries.radius.is_finite(),
            "must be positive",
        )?;
        self.queries
            .schedule()
            .validate()
            .map_err(|e| CliError::Config(format!("queries: {e}")))?;
        field(
            "queries.oracle_fraction",
            (0.0..=1.0).contains(&self.queries.oracle_fraction),
            "must lie in [0, 1]",
        )?;
        field(
            "concentration.samples",
            self.concentration.samples >= 1000,
            "must be at least 1000",
        )?;
        field(
            "concentration.eps_max",
            self.concentration.eps_max > 0.0 && self.concentration.eps_max <= 2.0,
            "must lie in (0, 2]",
        )?;
        field("vc.trials", self.vc.trials >= 1, "must be at least 1")?;
        field("vc.sample", self.vc.sample >= 5, "must be at least 5")?;
        field(
            "vc.eps",
            self.vc.eps > 0.0 && self.vc.eps < 1.0,
            "must lie in (0, 1)",
        )?;
        field(
            "vc.delta",
            self.vc.delta > 0.0 && self.vc.delta < 1.0,
            "must lie in (0, 1)",
        )?;
        field(
            "vc.deviation_dim",
            (1..=64).contains(&self.vc.deviation_dim),
            "must lie in [1, 64]",
        )?;
        Ok(())
    }
}
