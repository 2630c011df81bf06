//! `mcl report`: re-reads an artifact directory and re-checks it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mcl_core::concentration::{AlphaRow, NnRadiusRow};
use serde::de::DeserializeOwned;

use crate::error::{CliError, CliResult};
use crate::experiments::{
    BenchRow, Meta, SweepRow, ALPHA_FILE, BENCH_FILE, CURSE_FILE, META_FILE, NN_RADIUS_FILE,
    VC_FILE,
};
use crate::vc_demo::VcReport;

/// Summary text plus the checks that failed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub text: String,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
}

impl Report {
    fn check(&mut self, name: &str, pass: bool, detail: impl AsRef<str>) {
        let _ = writeln!(
            self.text,
            "  [{}] {name}: {}",
            if pass { "PASS" } else { "FAIL" },
            detail.as_ref()
        );
        if !pass {
            self.failures.push(format!("{name}: {}", detail.as_ref()));
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.text, "{}", s.as_ref());
    }
}

fn corrupt(path: &Path, reason: impl ToString) -> CliError {
    CliError::Artifact {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

fn read_csv<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| corrupt(path, e))?;
    let rows = r
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| corrupt(path, e))?;
    if rows.is_empty() {
        return Err(corrupt(path, "no rows"));
    }
    Ok(rows)
}

fn strictly(values: &[f64], increasing: bool) -> bool {
    values
        .windows(2)
        .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn fmt_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.4}"))
        .collect::<Vec<_>>()
        .join(" < ")
}

/// Builds the summary for `dir`. Fails with a usage-class error when the
/// directory holds no metadata or an artifact cannot be parsed.
pub fn report(dir: &Path) -> CliResult<Report> {
    if !dir.is_dir() {
        return Err(CliError::Usage(format!(
            "{}: not a directory",
            dir.display()
        )));
    }
    let meta_path = dir.join(META_FILE);
    if !meta_path.exists() {
        return Err(CliError::Usage(format!(
            "{}: no {META_FILE}, nothing to report",
            dir.display()
        )));
    }
    let text = fs::read_to_string(&meta_path).map_err(|e| CliError::io(&meta_path, e))?;
    let meta: Meta = serde_json::from_str(&text).map_err(|e| corrupt(&meta_path, e))?;

    let mut r = Report::default();
    if meta.version != mcl_core::VERSION {
        r.warnings.push(format!(
            "artifacts written by version {}, this is {}",
            meta.version,
            mcl_core::VERSION
        ));
    }
    r.line(format!(
        "{} (seed {}, version {})",
        meta.experiment.as_str(),
        meta.seed,
        meta.version
    ));
    r.check(
        "run invariants",
        meta.violations.is_empty(),
        if meta.violations.is_empty() {
            "none violated".to_string()
        } else {
            meta.violations.join("; ")
        },
    );

    for name in &meta.artifacts {
        let path = dir.join(name);
        if !path.exists() {
            return Err(corrupt(&path, "listed in meta.json but missing"));
        }
        match name.as_str() {
            CURSE_FILE => curse(&mut r, read_csv(&path)?),
            BENCH_FILE => bench(&mut r, read_csv(&path)?),
            ALPHA_FILE => alpha(&mut r, read_csv(&path)?),
            NN_RADIUS_FILE => nn_radius(&mut r, read_csv(&path)?),
            VC_FILE => {
                let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                vc(
                    &mut r,
                    serde_json::from_str(&text).map_err(|e| corrupt(&path, e))?,
                )
            }
            other => r.warnings.push(format!("unknown artifact {other}")),
        }
    }
    Ok(r)
}

fn by_strategy<T, F: Fn(&T) -> &str>(rows: Vec<T>, key: F) -> BTreeMap<String, Vec<T>> {
    let mut groups: BTreeMap<String, Vec<T>> = BTreeMap::new();
    for row in rows {
        groups.entry(key(&row).to_string()).or_default().push(row);
    }
    groups
}

fn curse(r: &mut Report, rows: Vec<SweepRow>) {
    for (strategy, mut rows) in by_strategy(rows, |s: &SweepRow| &s.strategy) {
        rows.sort_by_key(|s| s.d);
        r.line(format!("curse sweep, {strategy}:"));
        for s in &rows {
            let flag = if s.speedup < 2.0 {
                "  <- speedup below 2x"
            } else {
                ""
            };
            r.line(format!(
                "  d={:<4} n={:<6} leaves opened {:.3} of {}  cost {:.0}  speedup {:.2}x{flag}",
                s.d, s.n, s.fraction_opened, s.leaf_count, s.mean_cost, s.speedup
            ));
        }
        let fractions: Vec<f64> = rows.iter().map(|s| s.fraction_opened).collect();
        r.check(
            "fraction of leaves opened strictly increasing in d",
            strictly(&fractions, true),
            fmt_list(&fractions),
        );
        r.check(
            "fractions within [0, 1] and speedups positive",
            rows.iter()
                .all(|s| (0.0..=1.0).contains(&s.fraction_opened) && s.speedup > 0.0),
            format!("{} rows", rows.len()),
        );
        let slow: Vec<String> = rows
            .iter()
            .filter(|s| s.speedup < 2.0)
            .map(|s| s.d.to_string())
            .collect();
        r.line(format!(
            "  speedup below 2x at d = {}",
            if slow.is_empty() {
                "none".into()
            } else {
                slow.join(", ")
            }
        ));
    }
}

fn bench(r: &mut Report, rows: Vec<BenchRow>) {
    r.line("bench:");
    for b in &rows {
        r.line(format!(
            "  {:<6} d={:<4} n={:<6} {} cost {:.0}  bins {:.1}/{}  results {:.2}  speedup {:.2}x",
            b.strategy,
            b.d,
            b.n,
            b.mode,
            b.mean_cost,
            b.mean_bins_opened,
            b.leaf_count,
            b.mean_result_size,
            b.speedup
        ));
    }
    r.check(
        "bins opened never exceed the leaf count",
        rows.iter()
            .all(|b| b.mean_bins_opened <= b.leaf_count as f64),
        format!("{} rows", rows.len()),
    );
}

fn alpha(r: &mut Report, rows: Vec<AlphaRow>) {
    let mut by_d: BTreeMap<usize, Vec<&AlphaRow>> = BTreeMap::new();
    for row in &rows {
        by_d.entry(row.d).or_default().push(row);
    }
    for (d, rows) in by_d {
        let bound: Vec<&&AlphaRow> = rows
            .iter()
            .filter(|a| a.method == "chernoff_okamoto")
            .collect();
        let exact: Vec<&&AlphaRow> = rows
            .iter()
            .filter(|a| a.method == "exact_halfcube")
            .collect();
        if bound.is_empty() || exact.is_empty() {
            r.line(format!(
                "concentration d={d}: {} empirical rows",
                rows.len()
            ));
            continue;
        }
        let ok = exact.iter().all(|x| {
            bound
                .iter()
                .any(|b| (b.eps - x.eps).abs() < 1e-12 && x.value <= b.value)
        });
        let worst = exact
            .iter()
            .filter_map(|x| {
                bound
                    .iter()
                    .find(|b| (b.eps - x.eps).abs() < 1e-12)
                    .map(|b| x.value / b.value)
            })
            .fold(0.0f64, f64::max);
        r.check(
            &format!("exact half-cube value below the bound, d={d}"),
            ok && exact.len() == bound.len(),
            format!("{} grid points, largest ratio {worst:.3}", exact.len()),
        );
    }
}

fn nn_radius(r: &mut Report, mut rows: Vec<NnRadiusRow>) {
    rows.sort_by_key(|s| s.d);
    r.line("nearest-neighbour radius:");
    for s in &rows {
        r.line(format!(
            "  d={:<4} n={:<6} p10 {:.4}  median {:.4}  p90 {:.4}  mean {:.4}  occupancy {:.3}",
            s.d, s.n, s.p10, s.median, s.p90, s.mean, s.occupancy
        ));
    }
    if rows.len() > 1 {
        let medians: Vec<f64> = rows.iter().map(|s| s.median).collect();
        let spreads: Vec<f64> = rows.iter().map(|s| s.p90 - s.p10).collect();
        r.check(
            "median strictly increasing in d",
            strictly(&medians, true),
            fmt_list(&medians),
        );
        r.check(
            "spread p90 - p10 strictly decreasing in d",
            strictly(&spreads, false),
            spreads
                .iter()
                .map(|v| format!("{v:.4}"))
                .collect::<Vec<_>>()
                .join(" > "),
        );
    }
}

fn vc(r: &mut Report, v: VcReport) {
    r.line(format!(
        "vc toolkit ({} trials, budget {}):",
        v.trials, v.budget
    ));
    for s in v.searches.iter().filter(|s| !s.asserted) {
        r.line(format!(
            "  {} k={}: {} (reported only)",
            s.class,
            s.k,
            if s.found {
                "shattered set found"
            } else {
                "none found"
            }
        ));
    }
    for f in &v.finite_classes {
        r.line(format!(
            "  {}: {} concepts on {} points, vc {}",
            f.class, f.concepts, f.ground_size, f.vc
        ));
    }
    r.line(format!(
        "  deviation {:.5} at n = {} (eps {}), first below eps at n = {}",
        v.deviation.deviation,
        v.deviation.n,
        v.deviation.eps,
        v.deviation
            .first_n_below_eps
            .map_or("-".to_string(), |n| n.to_string())
    ));
    for c in &v.checks {
        r.check(&c.name, c.pass, &c.detail);
    }
}
