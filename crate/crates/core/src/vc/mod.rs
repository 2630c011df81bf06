//! Vapnik–Chervonenkis machinery: shattering checks, witness search,
//! exhaustive VC dimension of small finite classes, closed-form bounds, and
//! the deviation between empirical and true measure over a class.
//!
//! A set `B` is shattered by a class when every subset `C` of `B` equals
//! `A ∩ B` for some concept `A`. Subsets of a `k`-point set are encoded as
//! `k`-bit masks, bit `i` standing for the `i`-th point.

mod bounds;
mod classes;

use rand::seq::index;
use serde::Serialize;

pub use bounds::{
    bins_class_bound, bins_class_bound_with_base, finite_class_bound, goldberg_jerrum_bound,
    hamming_ball_vc_upper, sample_size_bound, sample_size_bound_with_base, LogBase,
};
pub use classes::{
    AxisBoxes, BallParam, BoxParam, EuclideanBalls, FiniteClass, HammingBalls, PredicateClass,
    WeightThresholds,
};

use crate::error::{invalid, MclError, Result};
use crate::rng::{substream, Stream, StreamRng};

/// Largest point set whose `2^k` subsets are enumerated.
pub const MAX_SHATTER_POINTS: usize = 20;

/// A family of subsets of some ground space, indexed by parameters.
pub trait ConceptClass: Sync {
    type Point: Clone + Sync;
    type Param: Clone + std::fmt::Debug + Send + Sync;

    fn name(&self) -> String;

    fn contains(&self, param: &Self::Param, x: &Self::Point) -> bool;

    /// The whole class as a finite list, if it is finite.
    fn enumerate(&self) -> Option<Vec<Self::Param>> {
        None
    }

    /// A finite list of parameters realizing every trace the class leaves on
    /// `points`, when one can be written down. The default uses
    /// [`ConceptClass::enumerate`].
    fn traces(&self, _points: &[Self::Point]) -> Option<Vec<Self::Param>> {
        self.enumerate()
    }

    /// A random parameter aimed at cutting `target` (a subset mask) out of
    /// `points`. Used only when [`ConceptClass::traces`] returns `None`.
    fn propose(
        &self,
        _points: &[Self::Point],
        _target: u32,
        _rng: &mut StreamRng,
    ) -> Option<Self::Param> {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShatterReport<P> {
    pub size: usize,
    pub shattered: bool,
    /// `true` when the answer came from an exhaustive trace list. A `false`
    /// verdict from sampling means "not found within budget", never a proof
    /// that the set cannot be shattered.
    pub exact: bool,
    /// Smallest unrealized subset mask, when not shattered.
    pub missing: Option<u32>,
    /// A realizing parameter for every mask, when shattered.
    pub concepts: Vec<P>,
}

impl<P> ShatterReport<P> {
    /// Indices of the points in the missing subset.
    pub fn missing_indices(&self) -> Option<Vec<usize>> {
        self.missing
            .map(|m| (0..self.size).filter(|i| m >> i & 1 == 1).collect())
    }
}

fn trace_mask<C: ConceptClass>(class: &C, p: &C::Param, points: &[C::Point]) -> u32 {
    points.iter().enumerate().fold(
        0u32,
        |m, (i, x)| if class.contains(p, x) { m | 1 << i } else { m },
    )
}

/// Decides whether `points` is shattered by `class`.
///
/// With an exhaustive trace list the answer is exact. Otherwise each subset
/// in mask order gets up to `budget` proposals, and the search stops at the
/// first subset no proposal realizes. The empty point set counts as
/// shattered.
pub fn shatters<C: ConceptClass>(
    points: &[C::Point],
    class: &C,
    budget: usize,
    seed: u64,
) -> Result<ShatterReport<C::Param>> {
    let k = points.len();
    if k > MAX_SHATTER_POINTS {
        return Err(MclError::TooManyPoints {
            max: MAX_SHATTER_POINTS,
            found: k,
        });
    }
    let full = 1usize << k;
    if k == 0 {
        return Ok(ShatterReport {
            size: 0,
            shattered: true,
            exact: true,
            missing: None,
            concepts: Vec::new(),
        });
    }

    if let Some(params) = class.traces(points) {
        let mut realized: Vec<Option<C::Param>> = vec![None; full];
        for p in params {
            let m = trace_mask(class, &p, points) as usize;
            if realized[m].is_none() {
                realized[m] = Some(p);
            }
        }
        let missing = realized.iter().position(Option::is_none).map(|m| m as u32);
        return Ok(ShatterReport {
            size: k,
            shattered: missing.is_none(),
            exact: true,
            missing,
            concepts: if missing.is_none() {
                realized.into_iter().map(Option::unwrap).collect()
            } else {
                Vec::new()
            },
        });
    }

    let mut rng = substream(seed, Stream::Concepts, 0);
    let mut concepts = Vec::with_capacity(full);
    for target in 0..full as u32 {
        let hit = (0..budget)
            .filter_map(|_| class.propose(points, target, &mut rng))
            .find(|p| trace_mask(class, p, points) == target);
        match hit {
            Some(p) => concepts.push(p),
            None => {
                return Ok(ShatterReport {
                    size: k,
                    shattered: false,
                    exact: false,
                    missing: Some(target),
                    concepts: Vec::new(),
                })
            }
        }
    }
    Ok(ShatterReport {
        size: k,
        shattered: true,
        exact: false,
        missing: None,
        concepts,
    })
}

/// Re-checks a shattering report: every recorded concept must cut out
/// exactly its own subset mask.
pub fn verify_concepts<C: ConceptClass>(
    points: &[C::Point],
    class: &C,
    report: &ShatterReport<C::Param>,
) -> bool {
    report.shattered
        && report.concepts.len() == 1 << points.len()
        && report
            .concepts
            .iter()
            .enumerate()
            .all(|(m, p)| trace_mask(class, p, points) as usize == m)
}

/// Number of distinct sets an enumerable class cuts out of `ground`.
pub fn distinct_traces<C: ConceptClass>(ground: &[C::Point], class: &C) -> Result<usize> {
    if ground.len() > 64 {
        return Err(MclError::TooManyPoints {
            max: 64,
            found: ground.len(),
        });
    }
    let params = class
        .enumerate()
        .ok_or_else(|| invalid("class", "counting traces needs an enumerable class"))?;
    let mut masks: Vec<u64> = params
        .iter()
        .map(|p| trace_mask64(class, p, ground))
        .collect();
    masks.sort_unstable();
    masks.dedup();
    Ok(masks.len())
}

fn trace_mask64<C: ConceptClass>(class: &C, p: &C::Param, points: &[C::Point]) -> u64 {
    points.iter().enumerate().fold(
        0u64,
        |m, (i, x)| if class.contains(p, x) { m | 1 << i } else { m },
    )
}

/// A shattered `k`-subset found by search, with its report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShatterWitness<X, P> {
    pub points: Vec<X>,
    pub indices: Vec<usize>,
    pub report: ShatterReport<P>,
}

/// Random search over `k`-subsets of `sample` for one the class shatters.
///
/// Tries up to `trials` subsets (all of them when there are fewer), each with
/// a per-subset proposal `budget`.
pub fn find_shattered_subset<C: ConceptClass>(
    sample: &[C::Point],
    class: &C,
    k: usize,
    trials: usize,
    budget: usize,
    seed: u64,
) -> Result<Option<ShatterWitness<C::Point, C::Param>>> {
    if k > MAX_SHATTER_POINTS {
        return Err(MclError::TooManyPoints {
            max: MAX_SHATTER_POINTS,
            found: k,
        });
    }
    if k > sample.len() {
        return Ok(None);
    }
    let mut rng = substream(seed, Stream::Trials, 1);
    for t in 0..trials {
        let mut indices = index::sample(&mut rng, sample.len(), k).into_vec();
        indices.sort_unstable();
        let points: Vec<C::Point> = indices.iter().map(|&i| sample[i].clone()).collect();
        let report = shatters(&points, class, budget, seed.wrapping_add(t as u64))?;
        if report.shattered {
            return Ok(Some(ShatterWitness {
                points,
                indices,
                report,
            }));
        }
    }
    Ok(None)
}

/// Largest subset of `ground` shattered by an enumerable class, found by
/// checking every subset. Returns the size and one witness as a mask over
/// `ground`.
pub fn vc_dimension_exhaustive<C: ConceptClass>(
    ground: &[C::Point],
    class: &C,
) -> Result<(usize, u64)> {
    if ground.len() > MAX_SHATTER_POINTS {
        return Err(MclError::TooManyPoints {
            max: MAX_SHATTER_POINTS,
            found: ground.len(),
        });
    }
    let params = class
        .enumerate()
        .ok_or_else(|| invalid("class", "exhaustive VC dimension needs an enumerable class"))?;
    let mut masks: Vec<u64> = params
        .iter()
        .map(|p| trace_mask64(class, p, ground))
        .collect();
    masks.sort_unstable();
    masks.dedup();

    let mut best = (0usize, 0u64);
    let mut seen = std::collections::HashSet::new();
    for subset in 0..(1u64 << ground.len()) {
        let size = subset.count_ones() as usize;
        if size <= best.0 || (1usize << size) > masks.len() {
            continue;
        }
        seen.clear();
        seen.extend(masks.iter().map(|m| m & subset));
        if seen.len() == 1 << size {
            best = (size, subset);
        }
    }
    Ok(best)
}

/// `sup_A |mu(A) - |X ∩ A| / n|` over an enumerable class, with `mu`
/// supplied per concept by `measure`.
pub fn empirical_deviation<C, M>(class: &C, dataset: &[C::Point], measure: M) -> Result<f64>
where
    C: ConceptClass,
    M: Fn(&C::Param) -> Option<f64>,
{
    if dataset.is_empty() {
        return Err(MclError::EmptyDataset);
    }
    let params = class
        .enumerate()
        .ok_or_else(|| invalid("class", "empirical deviation needs an enumerable class"))?;
    let n = dataset.len() as f64;
    let mut worst = 0.0f64;
    for p in &params {
        let mu = measure(p).ok_or_else(|| MclError::MissingMeasure(format!("{p:?}")))?;
        let hits = dataset.iter().filter(|x| class.contains(p, x)).count();
        worst = worst.max((mu - hits as f64 / n).abs());
    }
    Ok(worst)
}
