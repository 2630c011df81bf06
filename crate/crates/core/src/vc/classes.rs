use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::ConceptClass;
use crate::domain::Point;
use crate::rng::{substream, Stream, StreamRng};

/// Closed Euclidean balls in `R^dim`. A negative radius is the empty set.
#[derive(Clone, Copy, Debug)]
pub struct EuclideanBalls {
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallParam {
    pub center: Vec<f64>,
    pub radius: f64,
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl ConceptClass for EuclideanBalls {
    type Point = Vec<f64>;
    type Param = BallParam;

    fn name(&self) -> String {
        format!("euclidean-balls-{}", self.dim)
    }

    fn contains(&self, p: &BallParam, x: &Vec<f64>) -> bool {
        p.radius >= 0.0 && euclid(&p.center, x) <= p.radius + 1e-12 * (1.0 + p.radius)
    }

    /// On the line balls are intervals, and intervals between sample
    /// coordinates realize every possible trace.
    fn traces(&self, points: &[Vec<f64>]) -> Option<Vec<BallParam>> {
        if self.dim != 1 {
            return None;
        }
        let mut xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        let mut out = vec![BallParam {
            center: vec![0.0],
            radius: -1.0,
        }];
        for i in 0..xs.len() {
            for j in i..xs.len() {
                out.push(BallParam {
                    center: vec![(xs[i] + xs[j]) / 2.0],
                    radius: (xs[j] - xs[i]) / 2.0,
                });
            }
        }
        Some(out)
    }

    /// Balls through the farthest target point, centred either near the
    /// targets or far away along a random direction (approximating a
    /// half-space).
    fn propose(&self, points: &[Vec<f64>], target: u32, rng: &mut StreamRng) -> Option<BallParam> {
        let targets: Vec<&Vec<f64>> = points
            .iter()
            .enumerate()
            .filter(|(i, _)| target >> i & 1 == 1)
            .map(|(_, p)| p)
            .collect();
        if targets.is_empty() {
            return Some(BallParam {
                center: vec![0.0; self.dim],
                radius: -1.0,
            });
        }
        let mut centroid = vec![0.0; self.dim];
        for t in &targets {
            for (c, x) in centroid.iter_mut().zip(t.iter()) {
                *c += x / targets.len() as f64;
            }
        }
        let spread = points
            .iter()
            .map(|p| euclid(p, &centroid))
            .fold(0.0f64, f64::max)
            .max(1e-9);
        let dir: Vec<f64> = (0..self.dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let reach = if rng.random_bool(0.5) {
            spread * 10f64.powf(rng.random_range(0.0..4.0))
        } else {
            spread * rng.random_range(0.0..1.0)
        };
        let center: Vec<f64> = centroid
            .iter()
            .zip(&dir)
            .map(|(c, u)| c + reach * u / norm)
            .collect();
        let radius = targets
            .iter()
            .map(|t| euclid(t, &center))
            .fold(0.0f64, f64::max);
        Some(BallParam { center, radius })
    }
}

/// Closed axis-parallel boxes in `R^dim`.
#[derive(Clone, Copy, Debug)]
pub struct AxisBoxes {
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxParam {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ConceptClass for AxisBoxes {
    type Point = Vec<f64>;
    type Param = BoxParam;

    fn name(&self) -> String {
        format!("axis-boxes-{}", self.dim)
    }

    fn contains(&self, p: &BoxParam, x: &Vec<f64>) -> bool {
        x.iter()
            .zip(p.lo.iter().zip(&p.hi))
            .all(|(v, (l, h))| l <= v && v <= h)
    }

    /// The bounding box of each subset is the smallest box containing it, so
    /// a subset is realizable iff its bounding box realizes it.
    fn traces(&self, points: &[Vec<f64>]) -> Option<Vec<BoxParam>> {
        let k = points.len();
        let mut out = Vec::with_capacity(1 << k);
        for mask in 0u32..1 << k {
            let mut lo = vec![f64::INFINITY; self.dim];
            let mut hi = vec![f64::NEG_INFINITY; self.dim];
            for (i, p) in points.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for j in 0..self.dim {
                        lo[j] = lo[j].min(p[j]);
                        hi[j] = hi[j].max(p[j]);
                    }
                }
            }
            out.push(BoxParam { lo, hi });
        }
        Some(out)
    }
}

/// An explicit family of subsets of the ground set `{0, ..., ground_size - 1}`,
/// each stored as a bitmask.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteClass {
    pub name: String,
    pub ground_size: usize,
    pub sets: Vec<u64>,
}

impl FiniteClass {
    pub fn new(name: impl Into<String>, ground_size: usize, sets: Vec<u64>) -> Self {
        assert!(ground_size <= 64, "ground set holds at most 64 points");
        FiniteClass {
            name: name.into(),
            ground_size,
            sets,
        }
    }

    pub fn power_set(n: usize) -> Self {
        assert!(n <= 20);
        FiniteClass::new(format!("power-set-{n}"), n, (0..1u64 << n).collect())
    }

    /// `{x >= a}` for `a = 0, ..., n`.
    pub fn thresholds(n: usize) -> Self {
        let sets = (0..=n)
            .map(|a| (a..n).fold(0u64, |m, i| m | 1 << i))
            .collect();
        FiniteClass::new(format!("thresholds-{n}"), n, sets)
    }

    /// The empty set and every `[a, b]`.
    pub fn intervals(n: usize) -> Self {
        let mut sets = vec![0u64];
        for a in 0..n {
            for b in a..n {
                sets.push((a..=b).fold(0u64, |m, i| m | 1 << i));
            }
        }
        FiniteClass::new(format!("intervals-{n}"), n, sets)
    }

    /// `m` independent uniformly random subsets of an `n`-point ground set.
    pub fn random(n: usize, m: usize, seed: u64) -> Self {
        let mut rng = substream(seed, Stream::Concepts, 1);
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let sets = (0..m).map(|_| rng.random::<u64>() & mask).collect();
        FiniteClass::new(format!("random-{n}x{m}"), n, sets)
    }

    pub fn ground(&self) -> Vec<usize> {
        (0..self.ground_size).collect()
    }
}

impl ConceptClass for FiniteClass {
    type Point = usize;
    type Param = usize;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn contains(&self, p: &usize, x: &usize) -> bool {
        *x < 64 && self.sets[*p] >> x & 1 == 1
    }

    fn enumerate(&self) -> Option<Vec<usize>> {
        Some((0..self.sets.len()).collect())
    }
}

/// Closed Hamming balls `{x : |x xor c| <= r}` in `{0,1}^d`, radius in bits.
#[derive(Clone, Copy, Debug)]
pub struct HammingBalls {
    pub d: usize,
}

impl HammingBalls {
    /// Every vertex of `{0,1}^d`, in counting order.
    pub fn cube(d: usize) -> Vec<Point> {
        assert!(d <= 20);
        (0..1u64 << d)
            .map(|v| Point::Bits {
                len: d,
                words: if d == 0 { Vec::new() } else { vec![v] },
            })
            .collect()
    }
}

fn hamming_bits(a: &Point, b: &Point) -> Option<u32> {
    match (a, b) {
        (Point::Bits { words: x, .. }, Point::Bits { words: y, .. }) => {
            Some(x.iter().zip(y).map(|(u, v)| (u ^ v).count_ones()).sum())
        }
        _ => None,
    }
}

impl ConceptClass for HammingBalls {
    type Point = Point;
    type Param = (Point, u32);

    fn name(&self) -> String {
        format!("hamming-balls-{}", self.d)
    }

    fn contains(&self, (c, r): &(Point, u32), x: &Point) -> bool {
        hamming_bits(c, x).is_some_and(|k| k <= *r)
    }

    fn enumerate(&self) -> Option<Vec<(Point, u32)>> {
        if self.d > 20 {
            return None;
        }
        Some(
            HammingBalls::cube(self.d)
                .into_iter()
                .flat_map(|c| (0..=self.d as u32).map(move |r| (c.clone(), r)))
                .collect(),
        )
    }
}

/// `{x in {0,1}^d : |x| >= a}` for `a = 0, ..., d`.
#[derive(Clone, Copy, Debug)]
pub struct WeightThresholds {
    pub d: u32,
}

impl ConceptClass for WeightThresholds {
    type Point = Point;
    type Param = u32;

    fn name(&self) -> String {
        format!("weight-thresholds-{}", self.d)
    }

    fn contains(&self, a: &u32, x: &Point) -> bool {
        x.weight().is_some_and(|w| w >= *a)
    }

    fn enumerate(&self) -> Option<Vec<u32>> {
        Some((0..=self.d).collect())
    }
}

type Predicate = Box<dyn Fn(&Point) -> bool + Send + Sync>;

/// A finite class given by membership predicates, indexed by position.
pub struct PredicateClass {
    name: String,
    predicates: Vec<Predicate>,
}

impl PredicateClass {
    pub fn new(name: impl Into<String>) -> Self {
        PredicateClass {
            name: name.into(),
            predicates: Vec::new(),
        }
    }

    pub fn with(mut self, f: impl Fn(&Point) -> bool + Send + Sync + 'static) -> Self {
        self.predicates.push(Box::new(f));
        self
    }

    pub fn len(&self) -> usize {
        self.predicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }
}

impl ConceptClass for PredicateClass {
    type Point = Point;
    type Param = usize;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn contains(&self, i: &usize, x: &Point) -> bool {
        (self.predicates[*i])(x)
    }

    fn enumerate(&self) -> Option<Vec<usize>> {
        Some((0..self.predicates.len()).collect())
    }
}
