//! Concentration of measure: bounds, certified values and Monte Carlo
//! estimates of the concentration function, nearest-neighbour radius
//! statistics, neighbourhood measures and the bin-access prediction.
//!
//! The concentration function of a domain is
//! `alpha(eps) = 1 - min { mu(A_eps) : mu(A) >= 1/2 }` for `eps > 0` and
//! `1/2` at `eps = 0`. It cannot be computed over all sets, so this module
//! offers an analytic upper bound for the Hamming cube, an exact value for
//! one canonical half set, and statistical lower bounds from a battery of
//! half sets cut out by 1-Lipschitz witness functions.
//!
//! Neighbourhoods are closed, `A_eps = {x : rho(x, A) <= eps}`, unless a
//! function says otherwise. The complement of a closed neighbourhood is
//! contained in the complement of the open one, so every lower bound below
//! stays a lower bound for the open-ball definition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binomial;
use crate::domain::{sample_stream, DomainKind, DomainSpec, Point};
use crate::error::{invalid, MclError, Result};
use crate::rng::{substream, Stream};

/// `alpha(0)` by definition.
pub const ALPHA_AT_ZERO: f64 = 0.5;

const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ChernoffOkamoto,
    ExactHalfcube,
    EmpiricalLower,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ChernoffOkamoto => "chernoff_okamoto",
            Method::ExactHalfcube => "exact_halfcube",
            Method::EmpiricalLower => "empirical_lower",
        }
    }
}

/// Gaussian upper bound `exp(-3 eps^2 d / 4)` on the concentration function
/// of the normalized Hamming cube `{0,1}^d`.
pub fn chernoff_okamoto_bound(eps: f64, d: usize) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1], got {eps}")));
    }
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    Ok((-0.75 * eps * eps * d as f64).exp())
}

/// Integer offset `t = eps * d`, or an error if `eps` is off the `1/d` grid.
pub fn grid_offset(d: usize, eps: f64) -> Result<u32> {
    let product = eps * d as f64;
    let t = product.round();
    if !(eps >= 0.0) || (product - t).abs() > 1e-9 {
        return Err(MclError::OffGrid { product, dim: d });
    }
    Ok(t as u32)
}

/// Measure of the complement of the closed `eps`-neighbourhood of the half
/// cube `A = {x : |x| <= floor(d/2)}`, i.e. `P(Bin(d, 1/2) >= floor(d/2) + t + 1)`
/// with `t = eps * d`. Since `mu(A) >= 1/2` this is a certified lower bound
/// on `alpha(eps)`.
pub fn halfcube_alpha_exact(d: usize, eps: f64) -> Result<f64> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    let t = grid_offset(d, eps)?;
    Ok(halfcube_alpha_at_offset(d as u32, t))
}

pub fn halfcube_alpha_at_offset(d: u32, t: u32) -> f64 {
    binomial::tail_ge(d, d / 2 + t + 1)
}

/// Concentration function values on an `eps` grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationEstimate {
    pub spec: DomainSpec,
    pub method: Method,
    /// Monte Carlo sample size, 0 for analytic or exact methods.
    pub samples: usize,
    pub eps: Vec<f64>,
    pub alpha: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// One row of `alpha.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub d: usize,
    pub eps: f64,
    pub method: String,
    pub value: f64,
    pub stderr: f64,
}

impl ConcentrationEstimate {
    pub fn rows(&self) -> Vec<AlphaRow> {
        self.eps
            .iter()
            .zip(&self.alpha)
            .zip(&self.stderr)
            .map(|((&eps, &value), &stderr)| AlphaRow {
                d: self.spec.dim,
                eps,
                method: self.method.as_str().to_string(),
                value,
                stderr,
            })
            .collect()
    }
}

/// `eps = 1/d, 2/d, ..., t_max/d`.
pub fn hamming_grid(d: usize, t_max: usize) -> Vec<f64> {
    (1..=t_max.min(d)).map(|t| t as f64 / d as f64).collect()
}

/// `eps = 0.02, 0.04, ...` up to `max`.
pub fn continuous_grid(max: f64) -> Vec<f64> {
    (1..)
        .map(|k| k as f64 * 0.02)
        .take_while(|&e| e <= max + 1e-12)
        .collect()
}

pub fn chernoff_curve(d: usize, eps: &[f64]) -> Result<ConcentrationEstimate> {
    let alpha = eps
        .iter()
        .map(|&e| chernoff_okamoto_bound(e, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcentrationEstimate {
        spec: DomainSpec::hamming(d),
        method: Method::ChernoffOkamoto,
        samples: 0,
        stderr: vec![0.0; eps.len()],
        eps: eps.to_vec(),
        alpha,
    })
}

pub fn halfcube_curve(d: usize, eps: &[f64]) -> Result<ConcentrationEstimate> {
    let alpha = eps
        .iter()
        .map(|&e| halfcube_alpha_exact(d, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcentrationEstimate {
        spec: DomainSpec::hamming(d),
        method: Method::ExactHalfcube,
        samples: 0,
        stderr: vec![0.0; eps.len()],
        eps: eps.to_vec(),
        alpha,
    })
}

/// 1-Lipschitz functions whose median level sets serve as half sets.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// Scaled coordinate sum: Hamming weight over `d`, or the projection on
    /// the unit diagonal times the metric scale.
    CoordinateSum,
    /// The first coordinate times the metric scale.
    FirstCoordinate,
    /// Distance to a fixed point.
    DistanceTo(Point),
}

impl Witness {
    pub fn name(&self) -> &'static str {
        match self {
            Witness::CoordinateSum => "coordinate_sum",
            Witness::FirstCoordinate => "first_coordinate",
            Witness::DistanceTo(_) => "distance_to_point",
        }
    }

    pub fn value(&self, spec: &DomainSpec, x: &Point) -> f64 {
        match (self, x) {
            (Witness::CoordinateSum, Point::Bits { .. }) => {
                x.weight().unwrap() as f64 * spec.scale()
            }
            (Witness::CoordinateSum, Point::Real(v)) => {
                v.iter().sum::<f64>() / (spec.dim as f64).sqrt() * spec.scale()
            }
            (Witness::FirstCoordinate, Point::Bits { .. }) => {
                x.bit(0).unwrap() as u8 as f64 * spec.scale()
            }
            (Witness::FirstCoordinate, Point::Real(v)) => v[0] * spec.scale(),
            (Witness::DistanceTo(p), _) => spec.dist(p, x),
        }
    }

    /// The default battery for a domain; the distance witness is anchored at
    /// a point drawn from `seed`.
    pub fn battery(spec: &DomainSpec, seed: u64) -> Vec<Witness> {
        let anchor = spec.sample(&mut substream(seed, Stream::Oracle, 0));
        vec![
            Witness::CoordinateSum,
            Witness::FirstCoordinate,
            Witness::DistanceTo(anchor),
        ]
    }
}

/// Per-witness Monte Carlo estimates of `mu{x : g(x) > m + eps}`, where `m`
/// is the sample lower median of `g`, so that `{g <= m}` has measure at
/// least one half.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessCurve {
    pub witness: &'static str,
    pub median: f64,
    pub alpha: Vec<f64>,
    pub stderr: Vec<f64>,
}

const GRID_SLACK: f64 = 1e-9;

pub fn witness_curves(
    spec: &DomainSpec,
    seed: u64,
    samples: usize,
    eps: &[f64],
    witnesses: &[Witness],
) -> Result<Vec<WitnessCurve>> {
    if samples < 1000 {
        return Err(invalid("samples", "need at least 1000 samples"));
    }
    let chunks = samples.div_ceil(CHUNK);
    let values: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|j| {
            let mut rng = substream(seed, Stream::Witness, j as u64);
            let count = CHUNK.min(samples - j * CHUNK);
            let mut out = vec![Vec::with_capacity(count); witnesses.len()];
            for _ in 0..count {
                let x = spec.sample(&mut rng);
                for (w, o) in witnesses.iter().zip(out.iter_mut()) {
                    o.push(w.value(spec, &x));
                }
            }
            out
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(
            vec![Vec::with_capacity(samples); witnesses.len()],
            |mut acc, part| {
                for (a, p) in acc.iter_mut().zip(part) {
                    a.extend(p);
                }
                acc
            },
        );

    let n = samples as f64;
    Ok(witnesses
        .iter()
        .zip(values)
        .map(|(w, mut g)| {
            g.sort_unstable_by(f64::total_cmp);
            let median = g[(g.len() - 1) / 2];
            let (alpha, stderr) = eps
                .iter()
                .map(|&e| {
                    let cut = median + e + GRID_SLACK;
                    let above = g.len() - g.partition_point(|&v| v <= cut);
                    let p = above as f64 / n;
                    (p, (p * (1.0 - p) / n).sqrt())
                })
                .unzip();
            WitnessCurve {
                witness: w.name(),
                median,
                alpha,
                stderr,
            }
        })
        .collect())
}

/// Statistical lower bound on `alpha(eps)`: the largest witness estimate
/// at each `eps`, with that witness's standard error.
pub fn empirical_alpha_lower(
    spec: &DomainSpec,
    seed: u64,
    samples: usize,
    eps: &[f64],
) -> Result<ConcentrationEstimate> {
    let curves = witness_curves(spec, seed, samples, eps, &Witness::battery(spec, seed))?;
    let mut alpha = vec![0.0; eps.len()];
    let mut stderr = vec![0.0; eps.len()];
    for c in &curves {
        for k in 0..eps.len() {
            if c.alpha[k] > alpha[k] {
                alpha[k] = c.alpha[k];
                stderr[k] = c.stderr[k];
            }
        }
    }
    Ok(ConcentrationEstimate {
        spec: *spec,
        method: Method::EmpiricalLower,
        samples,
        eps: eps.to_vec(),
        alpha,
        stderr,
    })
}

/// Largest distance between sampled pairs, or the exact diameter when the
/// domain is bounded.
pub fn diameter_estimate(spec: &DomainSpec, seed: u64, pairs: usize) -> f64 {
    if let Some(d) = spec.diameter() {
        return d;
    }
    let mut rng = substream(seed, Stream::Pairs, 0);
    (0..pairs)
        .map(|_| {
            let x = spec.sample(&mut rng);
            let y = spec.sample(&mut rng);
            spec.dist(&x, &y)
        })
        .fold(0.0, f64::max)
}

/// Nearest-neighbour radius statistics for a sampled workload.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NnRadiusStats {
    pub d: usize,
    pub n: usize,
    pub queries: usize,
    pub seed: u64,
    pub p10: f64,
    pub median: f64,
    pub p90: f64,
    pub mean: f64,
    /// `p90 - p10`.
    pub spread: f64,
    /// Mean number of datapoints in the closed ball of radius `eps_NN`
    /// around the query: the nearest neighbour plus any ties.
    pub occupancy: f64,
}

/// One row of `nnradius.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnRadiusRow {
    pub d: usize,
    pub n: usize,
    pub p10: f64,
    pub median: f64,
    pub p90: f64,
    pub mean: f64,
    pub occupancy: f64,
    pub seed: u64,
}

impl NnRadiusStats {
    pub fn row(&self) -> NnRadiusRow {
        NnRadiusRow {
            d: self.d,
            n: self.n,
            p10: self.p10,
            median: self.median,
            p90: self.p90,
            mean: self.mean,
            occupancy: self.occupancy,
            seed: self.seed,
        }
    }
}

/// Nearest-rank quantile of sorted data: `sorted[ceil(q m) - 1]`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    let rank = ((q * m as f64).ceil() as usize).clamp(1, m);
    sorted[rank - 1]
}

/// Samples `n` datapoints and `queries` query centres from the domain
/// measure (separate substreams of `seed`) and measures the distance from
/// each centre to its nearest datapoint by linear scan.
pub fn nn_radius_stats(
    spec: &DomainSpec,
    n: usize,
    queries: usize,
    seed: u64,
) -> Result<NnRadiusStats> {
    if n < 2 {
        return Err(invalid("n", "need at least two datapoints"));
    }
    if queries == 0 {
        return Err(invalid("queries", "need at least one query"));
    }
    let data = sample_stream(spec, seed, Stream::Data, n);
    let centers = sample_stream(spec, seed, Stream::Queries, queries);
    let per_query: Vec<(f64, u32)> = centers
        .par_iter()
        .map(|w| {
            let mut best = f64::INFINITY;
            let mut count = 0u32;
            for x in &data {
                let r = spec.dist(w, x);
                if r < best {
                    best = r;
                    count = 1;
                } else if r == best {
                    count += 1;
                }
            }
            (best, count)
        })
        .collect();
    let mut radii: Vec<f64> = per_query.iter().map(|p| p.0).collect();
    let mean = radii.iter().sum::<f64>() / queries as f64;
    let occupancy = per_query.iter().map(|p| p.1 as u64).sum::<u64>() as f64 / queries as f64;
    radii.sort_unstable_by(f64::total_cmp);
    let (p10, median, p90) = (
        quantile(&radii, 0.1),
        quantile(&radii, 0.5),
        quantile(&radii, 0.9),
    );
    Ok(NnRadiusStats {
        d: spec.dim,
        n,
        queries,
        seed,
        p10,
        median,
        p90,
        mean,
        spread: p90 - p10,
        occupancy,
    })
}

/// Upper bound `min(1, alpha_Omega(eps/2) / mu(C))` on the concentration
/// function of a subset `C` with the induced metric and normalized measure.
pub fn subspace_alpha_bound(alpha_omega_at_half_eps: f64, mu_c: f64) -> Result<f64> {
    if !(mu_c > 0.0 && mu_c <= 1.0) {
        return Err(invalid("mu_c", format!("must lie in (0, 1], got {mu_c}")));
    }
    if !(0.0..=1.0).contains(&alpha_omega_at_half_eps) {
        return Err(invalid("alpha", "must lie in [0, 1]"));
    }
    Ok((alpha_omega_at_half_eps / mu_c).min(1.0))
}

/// A subset of a domain, decidable pointwise, optionally with an exact
/// distance-to-set function.
pub trait Region: Sync {
    fn contains(&self, spec: &DomainSpec, x: &Point) -> bool;

    /// Exact `rho(x, A)` when it has a closed form.
    fn distance_to(&self, _spec: &DomainSpec, _x: &Point) -> Option<f64> {
        None
    }
}

pub struct WholeSpace;

impl Region for WholeSpace {
    fn contains(&self, _: &DomainSpec, _: &Point) -> bool {
        true
    }

    fn distance_to(&self, _: &DomainSpec, _: &Point) -> Option<f64> {
        Some(0.0)
    }
}

/// `{x in {0,1}^d : |x| <= floor(d/2)}`.
pub struct HalfCube;

impl Region for HalfCube {
    fn contains(&self, spec: &DomainSpec, x: &Point) -> bool {
        x.weight().is_some_and(|w| w as usize <= spec.dim / 2)
    }

    fn distance_to(&self, spec: &DomainSpec, x: &Point) -> Option<f64> {
        let excess = (x.weight()? as usize).saturating_sub(spec.dim / 2);
        Some(excess as f64 * spec.scale())
    }
}

/// Closed ball `{x : rho(center, x) <= radius}`.
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Region for Ball {
    fn contains(&self, spec: &DomainSpec, x: &Point) -> bool {
        spec.dist(&self.center, x) <= self.radius
    }

    /// On the cube a geodesic from `x` toward the centre enters the ball
    /// after `rho - radius` rounded up to whole bits; in the Euclidean
    /// domains the gap is `rho - radius` (chordal distance on the sphere
    /// has no closed form, so the sphere falls back to witnesses).
    fn distance_to(&self, spec: &DomainSpec, x: &Point) -> Option<f64> {
        let gap = (spec.dist(&self.center, x) - self.radius).max(0.0);
        match spec.kind {
            DomainKind::Hamming => {
                let bits = (gap * spec.dim as f64 - GRID_SLACK).ceil().max(0.0);
                Some(bits * spec.scale())
            }
            DomainKind::Gaussian => Some(gap),
            DomainKind::UnitCube | DomainKind::Sphere => None,
        }
    }
}

/// A region given by a predicate only; neighbourhoods are measured against
/// a witness sample of the set.
pub struct Predicate<F>(pub F);

impl<F> Region for Predicate<F>
where
    F: Fn(&Point) -> bool + Sync,
{
    fn contains(&self, _: &DomainSpec, x: &Point) -> bool {
        (self.0)(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closure {
    Open,
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Stored members of the set used for distance-to-set, 0 when the
    /// region has an exact distance function.
    pub witnesses: usize,
}

const MAX_WITNESSES: usize = 4096;

fn proportion(hits: usize, samples: usize) -> MeasureEstimate {
    let p = hits as f64 / samples as f64;
    MeasureEstimate {
        value: p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        witnesses: 0,
    }
}

/// Monte Carlo estimate of `mu(A)`.
pub fn region_measure(
    spec: &DomainSpec,
    region: &dyn Region,
    samples: usize,
    seed: u64,
) -> Result<MeasureEstimate> {
    if samples == 0 {
        return Err(invalid("samples", "need at least one sample"));
    }
    let hits = count_chunks(samples, seed, Stream::Trials, |rng| {
        region.contains(spec, &spec.sample(rng))
    });
    Ok(proportion(hits, samples))
}

/// Monte Carlo estimate of `mu(A_eps)` for the closed neighbourhood.
///
/// When the region has no exact distance function, up to 4096 members are
/// collected by rejection sampling and `rho(x, A)` is replaced by the
/// distance to the nearest stored member, which can only under-count the
/// neighbourhood.
pub fn neighborhood_measure(
    spec: &DomainSpec,
    region: &dyn Region,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<MeasureEstimate> {
    neighborhood_measure_with(spec, region, eps, Closure::Closed, samples, seed)
}

pub fn neighborhood_measure_with(
    spec: &DomainSpec,
    region: &dyn Region,
    eps: f64,
    closure: Closure,
    samples: usize,
    seed: u64,
) -> Result<MeasureEstimate> {
    if samples == 0 {
        return Err(invalid("samples", "need at least one sample"));
    }
    if !(eps >= 0.0) {
        return Err(invalid("eps", "must be non-negative"));
    }
    let within = |r: f64| match closure {
        Closure::Closed => r <= eps + GRID_SLACK,
        Closure::Open => r < eps - GRID_SLACK,
    };
    let probe = spec.sample(&mut substream(seed, Stream::Oracle, 1));
    if region.distance_to(spec, &probe).is_some() {
        let hits = count_chunks(samples, seed, Stream::Trials, |rng| {
            let x = spec.sample(rng);
            region.contains(spec, &x)
                || within(region.distance_to(spec, &x).expect("exact distance"))
        });
        return Ok(proportion(hits, samples));
    }

    let mut rng = substream(seed, Stream::Witness, 0);
    let mut members = Vec::new();
    for _ in 0..samples {
        let x = spec.sample(&mut rng);
        if region.contains(spec, &x) {
            members.push(x);
            if members.len() == MAX_WITNESSES {
                break;
            }
        }
    }
    if members.is_empty() {
        return Err(MclError::EmptyWitness { budget: samples });
    }
    let hits = count_chunks(samples, seed, Stream::Trials, |rng| {
        let x = spec.sample(rng);
        region.contains(spec, &x) || members.iter().any(|m| within(spec.dist(m, &x)))
    });
    Ok(MeasureEstimate {
        witnesses: members.len(),
        ..proportion(hits, samples)
    })
}

fn count_chunks<F>(samples: usize, seed: u64, stream: Stream, hit: F) -> usize
where
    F: Fn(&mut crate::rng::StreamRng) -> bool + Sync,
{
    (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|j| {
            let mut rng = substream(seed, stream, j as u64);
            let count = CHUNK.min(samples - j * CHUNK);
            (0..count).filter(|_| hit(&mut rng)).count()
        })
        .sum()
}

/// Sampled check of the implication `mu(A) > alpha(gamma)  =>  mu(A_gamma) > 1/2`
/// (open neighbourhood), with `alpha_at_gamma` any upper bound on the
/// concentration function at `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GromovMilmanCheck {
    pub mu_a: MeasureEstimate,
    pub mu_a_gamma: MeasureEstimate,
    pub alpha_at_gamma: f64,
    /// `mu(A) > alpha(gamma)` by more than three standard errors.
    pub premise: bool,
    /// The conclusion holds within three standard errors, or the premise
    /// does not apply.
    pub holds: bool,
}

pub fn gromov_milman_check(
    spec: &DomainSpec,
    region: &dyn Region,
    gamma: f64,
    alpha_at_gamma: f64,
    samples: usize,
    seed: u64,
) -> Result<GromovMilmanCheck> {
    let mu_a = region_measure(spec, region, samples, seed)?;
    let mu_a_gamma = neighborhood_measure_with(
        spec,
        region,
        gamma,
        Closure::Open,
        samples,
        seed ^ 0x9e37_79b9,
    )?;
    let premise = mu_a.value - 3.0 * mu_a.stderr > alpha_at_gamma;
    let holds = !premise || mu_a_gamma.value > 0.5 - 3.0 * mu_a_gamma.stderr;
    Ok(GromovMilmanCheck {
        mu_a,
        mu_a_gamma,
        alpha_at_gamma,
        premise,
        holds,
    })
}

/// Prediction of the bin-access lemma for bins of measure at most `1/m`:
/// the `2 eps`-ball around all but `exceptional_measure` of the query
/// centres meets at least `min_bins_met` bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinAccessPrediction {
    pub min_bins_met: f64,
    pub exceptional_measure: f64,
}

pub fn bin_access_prediction(m: f64) -> Result<BinAccessPrediction> {
    if !(m >= 4.0 && m.is_finite()) {
        return Err(invalid(
            "m",
            format!("must be finite and at least 4, got {m}"),
        ));
    }
    let root = m.sqrt();
    Ok(BinAccessPrediction {
        min_bins_met: 0.5 * root,
        exceptional_measure: 0.5 / root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chernoff_values() {
        assert!((chernoff_okamoto_bound(0.1, 50).unwrap() - (-0.375f64).exp()).abs() < 1e-15);
        assert!((chernoff_okamoto_bound(0.1, 50).unwrap() - 0.6873).abs() < 1e-4);
        assert!((chernoff_okamoto_bound(0.2, 200).unwrap() - 0.00248).abs() < 1e-5);
        assert!(chernoff_okamoto_bound(1e-9, 30).unwrap() > 0.999_999);
        assert!(chernoff_okamoto_bound(0.0, 50).is_err());
        assert!(chernoff_okamoto_bound(1.5, 50).is_err());
        assert_eq!(ALPHA_AT_ZERO, 0.5);
    }

    #[test]
    fn halfcube_spot_values() {
        // sum_{k=31}^{50} C(50,k) / 2^50, evaluated with exact fractions
        assert!((halfcube_alpha_exact(50, 0.1).unwrap() - 0.05946022627971814).abs() < 1e-12);
        assert_eq!(halfcube_alpha_exact(2, 0.5).unwrap(), 0.0);
        assert!(matches!(
            halfcube_alpha_exact(50, 0.013),
            Err(MclError::OffGrid { dim: 50, .. })
        ));
    }

    #[test]
    fn halfcube_never_exceeds_chernoff() {
        for d in [10usize, 50, 100, 200] {
            for eps in hamming_grid(d, d) {
                let exact = halfcube_alpha_exact(d, eps).unwrap();
                let bound = chernoff_okamoto_bound(eps, d).unwrap();
                assert!(exact <= bound, "d={d} eps={eps}: {exact} > {bound}");
            }
        }
    }

    #[test]
    fn grids() {
        assert_eq!(hamming_grid(4, 2), vec![0.25, 0.5]);
        let g = continuous_grid(0.1);
        assert_eq!(g.len(), 5);
        assert!((g[4] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn coordinate_sum_witness_tracks_exact_halfcube() {
        let spec = DomainSpec::hamming(50);
        let curves = witness_curves(&spec, 3, 200_000, &[0.1], &[Witness::CoordinateSum]).unwrap();
        let exact = halfcube_alpha_exact(50, 0.1).unwrap();
        let c = &curves[0];
        assert_eq!(c.median, 0.5);
        assert!(
            (c.alpha[0] - exact).abs() <= 3.0 * c.stderr[0],
            "{} vs {exact}",
            c.alpha[0]
        );
    }

    #[test]
    fn beyond_the_diameter_nothing_is_left() {
        for kind in DomainKind::ALL {
            let spec = DomainSpec::new(kind, 8).unwrap();
            let eps = 1.5 * diameter_estimate(&spec, 1, 2000);
            let est = empirical_alpha_lower(&spec, 2, 5000, &[eps]).unwrap();
            assert_eq!(est.alpha, vec![0.0], "{kind}");
        }
    }

    #[test]
    fn empirical_lower_is_monotone() {
        let spec = DomainSpec::sphere(20);
        let est = empirical_alpha_lower(&spec, 5, 20_000, &continuous_grid(0.5)).unwrap();
        for w in est.alpha.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(empirical_alpha_lower(&spec, 5, 999, &[0.1]).is_err());
    }

    #[test]
    fn concentration_sharpens_on_the_sphere() {
        let lo = empirical_alpha_lower(&DomainSpec::sphere(16), 7, 50_000, &[0.2]).unwrap();
        let hi = empirical_alpha_lower(&DomainSpec::sphere(64), 7, 50_000, &[0.2]).unwrap();
        assert!(
            hi.alpha[0] < lo.alpha[0],
            "{} !< {}",
            hi.alpha[0],
            lo.alpha[0]
        );
    }

    #[test]
    fn quantiles_use_nearest_rank() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(quantile(&v, 0.1), 1.0);
        assert_eq!(quantile(&v, 0.5), 5.0);
        assert_eq!(quantile(&v, 0.9), 9.0);
        assert_eq!(quantile(&[3.0], 0.5), 3.0);
    }

    #[test]
    fn two_point_dataset() {
        let spec = DomainSpec::unit_cube(3);
        let s = nn_radius_stats(&spec, 2, 1, 4).unwrap();
        let data = sample_stream(&spec, 4, Stream::Data, 2);
        let q = &sample_stream(&spec, 4, Stream::Queries, 1)[0];
        let nearer = spec.dist(q, &data[0]).min(spec.dist(q, &data[1]));
        assert_eq!(s.median, nearer);
        assert!(s.occupancy >= 1.0);
        assert!(nn_radius_stats(&spec, 1, 10, 4).is_err());
    }

    #[test]
    fn subspace_bound() {
        assert!((subspace_alpha_bound(0.01, 0.5).unwrap() - 0.02).abs() < 1e-15);
        assert_eq!(subspace_alpha_bound(0.5, 0.25).unwrap(), 1.0);
        assert_eq!(subspace_alpha_bound(0.0, 0.3).unwrap(), 0.0);
        assert!(subspace_alpha_bound(0.1, 0.0).is_err());
    }

    #[test]
    fn neighbourhoods() {
        let spec = DomainSpec::hamming(50);
        assert_eq!(
            neighborhood_measure(&spec, &WholeSpace, 0.05, 1000, 1)
                .unwrap()
                .value,
            1.0
        );
        let est = neighborhood_measure(&spec, &HalfCube, 0.1, 200_000, 2).unwrap();
        let expect = 1.0 - halfcube_alpha_exact(50, 0.1).unwrap();
        assert!(
            (est.value - expect).abs() <= 3.0 * est.stderr,
            "{} vs {expect}",
            est.value
        );
        assert!((expect - 0.9405).abs() < 1e-4);
    }

    #[test]
    fn witness_fallback_and_empty_witness() {
        let spec = DomainSpec::unit_cube(2);
        let left = Predicate(|x: &Point| x.coords().unwrap()[0] < 0.5);
        let est = neighborhood_measure(&spec, &left, 0.05, 20_000, 3).unwrap();
        // exact: x0 < 0.5 + 0.05 * sqrt(2)
        let exact = 0.5 + 0.05 * 2f64.sqrt();
        assert!(est.witnesses > 0);
        assert!(est.value <= exact + 3.0 * est.stderr);
        assert!(est.value > 0.5);
        let never = Predicate(|_: &Point| false);
        assert!(matches!(
            neighborhood_measure(&spec, &never, 0.1, 100, 3),
            Err(MclError::EmptyWitness { budget: 100 })
        ));
    }

    #[test]
    fn gromov_milman_on_hamming_balls() {
        let spec = DomainSpec::hamming(64);
        let center = spec.sample(&mut substream(1, Stream::Oracle, 9));
        // ball of radius 28 bits: mass P(Bin(64,1/2) <= 28) ~ 0.18
        let region = Ball {
            center,
            radius: 28.0 / 64.0,
        };
        for gamma in [0.125, 0.1875, 0.25] {
            let alpha = chernoff_okamoto_bound(gamma, 64).unwrap();
            let c = gromov_milman_check(&spec, &region, gamma, alpha, 50_000, 4).unwrap();
            assert!(c.holds, "gamma={gamma}: {c:?}");
        }
        let c = gromov_milman_check(
            &spec,
            &region,
            0.25,
            chernoff_okamoto_bound(0.25, 64).unwrap(),
            50_000,
            4,
        )
        .unwrap();
        assert!(c.premise);
    }

    #[test]
    fn bin_access_formulas() {
        let p = bin_access_prediction(4.0).unwrap();
        assert_eq!((p.min_bins_met, p.exceptional_measure), (1.0, 0.25));
        let p = bin_access_prediction(100.0).unwrap();
        assert!(
            (p.min_bins_met - 5.0).abs() < 1e-12 && (p.exceptional_measure - 0.05).abs() < 1e-12
        );
        let p = bin_access_prediction(1e4).unwrap();
        assert!(
            (p.min_bins_met - 50.0).abs() < 1e-12 && (p.exceptional_measure - 0.005).abs() < 1e-12
        );
        assert!(bin_access_prediction(3.9).is_err());
    }
}
