//! The `vc_demo` experiment: witness searches for balls and boxes, exhaustive
//! VC dimensions of small finite classes, the bound calculators, and an
//! empirical-deviation run at the learning sample size.

use mcl_core::binomial;
use mcl_core::domain::{sample_points, sample_stream};
use mcl_core::rng::Stream;
use mcl_core::vc::{
    bins_class_bound, distinct_traces, empirical_deviation, find_shattered_subset,
    finite_class_bound, goldberg_jerrum_bound, hamming_ball_vc_upper, sample_size_bound,
    vc_dimension_exhaustive, verify_concepts, AxisBoxes, ConceptClass, EuclideanBalls, FiniteClass,
    HammingBalls, LogBase, WeightThresholds,
};
use mcl_core::DomainSpec;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliResult;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VcReport {
    pub seed: u64,
    pub trials: usize,
    pub budget: usize,
    pub sample: usize,
    pub log_bases: LogBases,
    pub searches: Vec<SearchEntry>,
    pub finite_classes: Vec<FiniteEntry>,
    pub bounds: BoundTables,
    pub deviation: DeviationEntry,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogBases {
    pub sample_size: LogBase,
    pub bins_class: LogBase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchEntry {
    pub class: String,
    pub k: usize,
    pub expect_found: bool,
    /// Whether the outcome is checked or only reported.
    pub asserted: bool,
    pub found: bool,
    /// `true` when every trial was decided exactly rather than by sampling.
    pub exact: bool,
    pub witness: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteEntry {
    pub class: String,
    pub ground_size: usize,
    pub concepts: usize,
    pub vc: usize,
    pub log_bound: usize,
    pub formula_bound: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundTables {
    pub goldberg_jerrum: Vec<(u64, u64, u64)>,
    pub bins_class: Vec<(u64, u64, f64)>,
    pub sample_size: Vec<(f64, f64, u64, u64)>,
    pub hamming_ball_upper: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationEntry {
    pub class: String,
    pub vc: u64,
    pub eps: f64,
    pub delta: f64,
    pub n: u64,
    pub deviation: f64,
    /// Smallest power-of-two prefix of the sample whose deviation is
    /// already below `eps`.
    pub first_n_below_eps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(checks: &mut Vec<Check>, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
    checks.push(Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    });
}

fn search<C>(
    class: &C,
    sample: &[Vec<f64>],
    k: usize,
    expect_found: bool,
    asserted: bool,
    cfg: &ExperimentConfig,
) -> CliResult<SearchEntry>
where
    C: ConceptClass<Point = Vec<f64>>,
{
    let v = &cfg.vc;
    let w = find_shattered_subset(sample, class, k, v.trials, v.budget, cfg.seed)?;
    let exact = class.traces(&sample[..k.min(sample.len())]).is_some();
    Ok(SearchEntry {
        class: class.name(),
        k,
        expect_found,
        asserted,
        found: w.is_some(),
        exact,
        witness: w.and_then(|w| verify_concepts(&w.points, class, &w.report).then_some(w.points)),
    })
}

fn finite<C: ConceptClass>(
    ground: &[C::Point],
    class: &C,
    formula_bound: Option<usize>,
) -> CliResult<FiniteEntry> {
    let concepts = distinct_traces(ground, class)?;
    let (vc, _) = vc_dimension_exhaustive(ground, class)?;
    Ok(FiniteEntry {
        class: class.name(),
        ground_size: ground.len(),
        concepts,
        vc,
        log_bound: finite_class_bound(concepts),
        formula_bound,
    })
}

fn coords(spec: DomainSpec, seed: u64, n: usize) -> Vec<Vec<f64>> {
    sample_points(&spec, seed, n)
        .into_iter()
        .map(|p| p.coords().expect("real domain").to_vec())
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<VcReport> {
    let v = &cfg.vc;
    let mut checks = Vec::new();

    let line = coords(DomainSpec::unit_cube(1), cfg.seed, v.sample);
    let plane = coords(DomainSpec::unit_cube(2), cfg.seed, v.sample);
    let searches = vec![
        search(&EuclideanBalls { dim: 1 }, &line, 2, true, true, cfg)?,
        search(&EuclideanBalls { dim: 1 }, &line, 3, false, true, cfg)?,
        search(&EuclideanBalls { dim: 2 }, &plane, 3, true, true, cfg)?,
        search(&EuclideanBalls { dim: 2 }, &plane, 4, false, true, cfg)?,
        search(&AxisBoxes { dim: 1 }, &line, 2, true, true, cfg)?,
        search(&AxisBoxes { dim: 1 }, &line, 3, false, true, cfg)?,
        search(&AxisBoxes { dim: 2 }, &plane, 4, true, false, cfg)?,
        search(&AxisBoxes { dim: 2 }, &plane, 5, false, false, cfg)?,
    ];
    for s in searches.iter().filter(|s| s.asserted) {
        let ok = s.found == s.expect_found && (!s.found || s.witness.is_some());
        let what = if s.found { "found" } else { "none found" };
        check(
            &mut checks,
            format!("{} k={}", s.class, s.k),
            ok,
            format!("{what} in {} trials", v.trials),
        );
    }

    let mut finite_classes = vec![
        finite(
            &FiniteClass::power_set(4).ground(),
            &FiniteClass::power_set(4),
            Some(4),
        )?,
        finite(
            &FiniteClass::thresholds(8).ground(),
            &FiniteClass::thresholds(8),
            Some(1),
        )?,
        finite(
            &FiniteClass::intervals(8).ground(),
            &FiniteClass::intervals(8),
            Some(2),
        )?,
    ];
    for (n, m, s) in [(10usize, 10usize, 1u64), (12, 40, 2)] {
        let c = FiniteClass::random(n, m, cfg.seed.wrapping_add(s));
        finite_classes.push(finite(&c.ground(), &c, None)?);
    }
    for d in 2..=4 {
        finite_classes.push(finite(
            &HammingBalls::cube(d),
            &HammingBalls { d },
            Some(hamming_ball_vc_upper(d)),
        )?);
    }
    for f in &finite_classes {
        check(
            &mut checks,
            format!("{} log bound", f.class),
            f.vc <= f.log_bound,
            format!("vc {} vs ceil(log2 {}) = {}", f.vc, f.concepts, f.log_bound),
        );
        if let Some(b) = f.formula_bound {
            let known = !f.class.starts_with("hamming");
            let ok = if known { f.vc == b } else { f.vc <= b };
            check(
                &mut checks,
                format!("{} formula", f.class),
                ok,
                format!("vc {} vs {b}", f.vc),
            );
        }
    }

    let mut goldberg_jerrum = vec![
        (1, 1, goldberg_jerrum_bound(1, 1)),
        (3, 10, goldberg_jerrum_bound(3, 10)),
    ];
    goldberg_jerrum
        .extend([1u64, 2, 4, 8, 16, 32, 64].map(|d| (d, d, goldberg_jerrum_bound(d, d))));
    let mut bins_class = Vec::new();
    for h in 1..=8u64 {
        for p in [1u64, 2, 4] {
            bins_class.push((h, p, bins_class_bound(h, p)));
        }
    }
    let mut sample_size = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        for d in [1u64, 2, 3, 10] {
            sample_size.push((eps, 0.05, d, sample_size_bound(eps, 0.05, d)?));
        }
    }
    let bounds = BoundTables {
        goldberg_jerrum,
        bins_class,
        sample_size,
        hamming_ball_upper: (1..=8).map(|d| (d, hamming_ball_vc_upper(d))).collect(),
    };
    check(
        &mut checks,
        "goldberg-jerrum (3, 10)",
        goldberg_jerrum_bound(3, 10) == 144,
        goldberg_jerrum_bound(3, 10).to_string(),
    );
    let b84 = bins_class_bound(8, 4);
    check(
        &mut checks,
        "bins-class (8, 4)",
        (b84 - 768.0).abs() < 1e-9,
        b84.to_string(),
    );

    let deviation = deviation_run(cfg)?;
    check(
        &mut checks,
        "empirical deviation at the learning bound",
        deviation.deviation <= deviation.eps,
        format!("{} at n = {}", deviation.deviation, deviation.n),
    );

    Ok(VcReport {
        seed: cfg.seed,
        trials: v.trials,
        budget: v.budget,
        sample: v.sample,
        log_bases: LogBases {
            sample_size: LogBase::Natural,
            bins_class: LogBase::Two,
        },
        searches,
        finite_classes,
        bounds,
        deviation,
        checks,
    })
}

fn deviation_run(cfg: &ExperimentConfig) -> CliResult<DeviationEntry> {
    let v = &cfg.vc;
    let d = v.deviation_dim;
    let class = WeightThresholds { d };
    // thresholds on a single statistic form a chain, so the class has VC dimension 1
    let vc = 1;
    let n = sample_size_bound(v.eps, v.delta, vc)?;
    let data = sample_stream(
        &DomainSpec::hamming(d as usize),
        cfg.seed,
        Stream::Trials,
        n as usize,
    );
    let mu: Vec<f64> = (0..=d).map(|a| binomial::tail_ge(d, a)).collect();
    let measure = |a: &u32| mu.get(*a as usize).copied();
    let deviation = empirical_deviation(&class, &data, measure)?;
    let mut first = None;
    let mut m = 16usize;
    while m <= data.len() {
        if empirical_deviation(&class, &data[..m], measure)? < v.eps {
            first = Some(m);
            break;
        }
        m *= 2;
    }
    Ok(DeviationEntry {
        class: class.name(),
        vc,
        eps: v.eps,
        delta: v.delta,
        n,
        deviation,
        first_n_below_eps: first,
    })
}
