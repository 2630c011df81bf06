//! Metric-measure domains used as search workloads.
//!
//! Each [`DomainKind`] pairs a point set with a metric scaled so that the
//! expected distance between two independent points stays of order one as
//! the dimension grows, and with its canonical probability measure.
//!
//! | kind       | points          | metric                    | measure          |
//! |------------|-----------------|---------------------------|------------------|
//! | hamming    | `{0,1}^d`       | differing bits / d        | uniform          |
//! | unit-cube  | `[0,1]^d`       | Euclidean / sqrt(d)       | uniform          |
//! | gaussian   | `R^d`           | Euclidean / sqrt(2d)      | standard normal  |
//! | sphere     | `S^{d-1} in R^d`| chordal / sqrt(2)         | uniform          |

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, MclError, Result};
use crate::rng::{substream, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Hamming,
    UnitCube,
    Gaussian,
    Sphere,
}

impl DomainKind {
    pub const ALL: [DomainKind; 4] = [
        DomainKind::Hamming,
        DomainKind::UnitCube,
        DomainKind::Gaussian,
        DomainKind::Sphere,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DomainKind::Hamming => "hamming",
            DomainKind::UnitCube => "unit-cube",
            DomainKind::Gaussian => "gaussian",
            DomainKind::Sphere => "sphere",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            DomainKind::Hamming => 0,
            DomainKind::UnitCube => 1,
            DomainKind::Gaussian => 2,
            DomainKind::Sphere => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DomainKind {
    type Err = MclError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamming" => Ok(DomainKind::Hamming),
            "unit-cube" | "cube" => Ok(DomainKind::UnitCube),
            "gaussian" => Ok(DomainKind::Gaussian),
            "sphere" => Ok(DomainKind::Sphere),
            other => Err(invalid("kind", format!("unknown domain kind `{other}`"))),
        }
    }
}

/// A domain kind together with its dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub dim: usize,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "dimension must be at least 1"));
        }
        if kind == DomainKind::Sphere && dim < 2 {
            return Err(invalid(
                "dim",
                "the sphere needs an ambient dimension of at least 2",
            ));
        }
        Ok(DomainSpec { kind, dim })
    }

    pub fn hamming(dim: usize) -> Self {
        Self::new(DomainKind::Hamming, dim).expect("valid hamming dimension")
    }

    pub fn unit_cube(dim: usize) -> Self {
        Self::new(DomainKind::UnitCube, dim).expect("valid cube dimension")
    }

    pub fn gaussian(dim: usize) -> Self {
        Self::new(DomainKind::Gaussian, dim).expect("valid gaussian dimension")
    }

    pub fn sphere(dim: usize) -> Self {
        Self::new(DomainKind::Sphere, dim).expect("valid sphere dimension")
    }

    /// Factor applied to the raw metric (bit count or Euclidean norm).
    pub fn scale(&self) -> f64 {
        let d = self.dim as f64;
        match self.kind {
            DomainKind::Hamming => 1.0 / d,
            DomainKind::UnitCube => 1.0 / d.sqrt(),
            DomainKind::Gaussian => 1.0 / (2.0 * d).sqrt(),
            DomainKind::Sphere => std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    /// Number of `u64` words a Hamming point of this dimension occupies.
    pub fn words(&self) -> usize {
        self.dim.div_ceil(64)
    }

    /// Upper bound on the normalized distance between two points, or
    /// `None` for unbounded domains.
    pub fn diameter(&self) -> Option<f64> {
        match self.kind {
            DomainKind::Hamming | DomainKind::UnitCube => Some(1.0),
            DomainKind::Sphere => Some(std::f64::consts::SQRT_2),
            DomainKind::Gaussian => None,
        }
    }

    /// Checks that `p` is a valid point of this domain.
    pub fn check(&self, p: &Point) -> Result<()> {
        match (self.kind, p) {
            (DomainKind::Hamming, Point::Bits { len, .. }) => {
                if *len != self.dim {
                    return Err(MclError::DimensionMismatch {
                        expected: self.dim,
                        found: *len,
                    });
                }
                Ok(())
            }
            (DomainKind::Hamming, _) | (_, Point::Bits { .. }) => {
                Err(MclError::KindMismatch(self.kind))
            }
            (_, Point::Real(v)) => {
                if v.len() != self.dim {
                    return Err(MclError::DimensionMismatch {
                        expected: self.dim,
                        found: v.len(),
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("point", "coordinates must be finite"));
                }
                Ok(())
            }
        }
    }

    /// Normalized distance between two points already known to be valid.
    #[inline]
    pub fn dist(&self, x: &Point, y: &Point) -> f64 {
        match (x, y) {
            (Point::Bits { words: a, .. }, Point::Bits { words: b, .. }) => {
                hamming_count(a, b) as f64 * self.scale()
            }
            (Point::Real(a), Point::Real(b)) => euclidean(a, b) * self.scale(),
            _ => panic!("mixed point representations"),
        }
    }

    /// Draws one point from the domain's canonical measure.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let d = self.dim;
        match self.kind {
            DomainKind::Hamming => {
                let mut words: Vec<u64> = (0..self.words()).map(|_| rng.random()).collect();
                mask_tail(&mut words, d);
                Point::Bits { len: d, words }
            }
            DomainKind::UnitCube => Point::Real((0..d).map(|_| rng.random::<f64>()).collect()),
            DomainKind::Gaussian => {
                Point::Real((0..d).map(|_| StandardNormal.sample(rng)).collect())
            }
            DomainKind::Sphere => loop {
                let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    break Point::Real(v.into_iter().map(|x| x / norm).collect());
                }
            },
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(d={})", self.kind, self.dim)
    }
}

#[inline]
fn hamming_count(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

#[inline]
fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

fn mask_tail(words: &mut [u64], len: usize) {
    let rem = len % 64;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

/// A point of some domain: packed bits for the Hamming cube, reals otherwise.
///
/// Bit `i` of a Hamming point lives in word `i / 64` at position `i % 64`;
/// bits past `len` are always zero.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Bits { len: usize, words: Vec<u64> },
    Real(Vec<f64>),
}

impl Point {
    pub fn from_bits(bits: &[bool]) -> Point {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        Point::Bits {
            len: bits.len(),
            words,
        }
    }

    /// Parses a string of `0`/`1` characters, first character is bit 0.
    pub fn from_bit_str(s: &str) -> Result<Point> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(invalid("bits", format!("unexpected character `{c}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Point::from_bits(&bits))
    }

    pub fn dim(&self) -> usize {
        match self {
            Point::Bits { len, .. } => *len,
            Point::Real(v) => v.len(),
        }
    }

    pub fn bit(&self, i: usize) -> Option<bool> {
        match self {
            Point::Bits { len, words } if i < *len => Some(words[i / 64] >> (i % 64) & 1 == 1),
            _ => None,
        }
    }

    /// Number of set bits, or `None` for real points.
    pub fn weight(&self) -> Option<u32> {
        match self {
            Point::Bits { words, .. } => Some(words.iter().map(|w| w.count_ones()).sum()),
            Point::Real(_) => None,
        }
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Real(v) => Some(v),
            Point::Bits { .. } => None,
        }
    }
}

/// Checked normalized distance.
pub fn distance(spec: &DomainSpec, x: &Point, y: &Point) -> Result<f64> {
    spec.check(x)?;
    spec.check(y)?;
    Ok(spec.dist(x, y))
}

/// A dataset: points drawn from one domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub spec: DomainSpec,
    pub points: Vec<Point>,
    /// Seed the points were sampled with, if they were sampled.
    pub seed: Option<u64>,
}

impl Dataset {
    pub fn new(spec: DomainSpec, points: Vec<Point>) -> Result<Self> {
        for p in &points {
            spec.check(p)?;
        }
        Ok(Dataset {
            spec,
            points,
            seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, i: usize) -> &Point {
        &self.points[i]
    }
}

/// `n` i.i.d. points from the canonical measure of `spec`.
pub fn sample_points(spec: &DomainSpec, seed: u64, n: usize) -> Vec<Point> {
    sample_stream(spec, seed, Stream::Data, n)
}

/// Like [`sample_points`] but drawing from an explicit substream, so data
/// and query sets built from one seed stay independent.
pub fn sample_stream(spec: &DomainSpec, seed: u64, stream: Stream, n: usize) -> Vec<Point> {
    let mut rng = substream(seed, stream, 0);
    (0..n).map(|_| spec.sample(&mut rng)).collect()
}

pub fn sample_dataset(spec: &DomainSpec, seed: u64, n: usize) -> Dataset {
    Dataset {
        spec: *spec,
        points: sample_points(spec, seed, n),
        seed: Some(seed),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    pub mean: f64,
    pub std: f64,
    pub pairs: usize,
    pub seed: u64,
}

const PAIR_CHUNK: usize = 4096;

/// Monte Carlo estimate of the mean distance between independent points.
///
/// Pairs are drawn in chunks of 4096, chunk `j` from its own substream, and
/// the partial sums are combined in chunk order, so the result does not
/// depend on the thread count.
pub fn mean_distance_estimate(spec: &DomainSpec, seed: u64, pairs: usize) -> Result<DistanceStats> {
    if pairs == 0 {
        return Err(invalid("pairs", "need at least one pair"));
    }
    let chunks = pairs.div_ceil(PAIR_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|j| {
            let mut rng = substream(seed, Stream::Pairs, j as u64);
            let count = PAIR_CHUNK.min(pairs - j * PAIR_CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let x = spec.sample(&mut rng);
                let y = spec.sample(&mut rng);
                let r = spec.dist(&x, &y);
                s += r;
                s2 += r * r;
            }
            (s, s2)
        })
        .collect();
    let (sum, sum2) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (s, s2)| (a + s, b + s2));
    let n = pairs as f64;
    let mean = sum / n;
    let var = if pairs > 1 {
        ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(DistanceStats {
        mean,
        std: var.sqrt(),
        pairs,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Point {
        Point::from_bit_str(s).unwrap()
    }

    #[test]
    fn hamming_distance_counts_differing_bits() {
        let spec = DomainSpec::hamming(4);
        assert_eq!(distance(&spec, &bits("0011"), &bits("0110")).unwrap(), 0.5);
    }

    #[test]
    fn identical_points_are_at_distance_zero() {
        for kind in DomainKind::ALL {
            let spec = DomainSpec::new(kind, 5).unwrap();
            let p = sample_points(&spec, 3, 1).pop().unwrap();
            assert_eq!(distance(&spec, &p, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn cube_diagonal_is_one() {
        let spec = DomainSpec::unit_cube(2);
        let d = distance(
            &spec,
            &Point::Real(vec![0.0, 0.0]),
            &Point::Real(vec![1.0, 1.0]),
        )
        .unwrap();
        // sqrt(2) / sqrt(2)
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_points_are_rejected() {
        let spec = DomainSpec::hamming(4);
        assert!(matches!(
            distance(&spec, &bits("0011"), &bits("00110")),
            Err(MclError::DimensionMismatch {
                expected: 4,
                found: 5
            })
        ));
        assert!(matches!(
            distance(&spec, &bits("0011"), &Point::Real(vec![0.0; 4])),
            Err(MclError::KindMismatch(DomainKind::Hamming))
        ));
        let cube = DomainSpec::unit_cube(2);
        assert!(distance(
            &cube,
            &Point::Real(vec![0.0, f64::NAN]),
            &Point::Real(vec![0.0, 0.0])
        )
        .is_err());
    }

    #[test]
    fn zero_dimension_is_invalid() {
        assert!(DomainSpec::new(DomainKind::Gaussian, 0).is_err());
        assert!(DomainSpec::new(DomainKind::Sphere, 1).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = DomainSpec::hamming(8);
        assert_eq!(sample_points(&spec, 7, 3), sample_points(&spec, 7, 3));
        assert_ne!(sample_points(&spec, 7, 3), sample_points(&spec, 8, 3));
    }

    #[test]
    fn hamming_tail_bits_stay_clear() {
        let spec = DomainSpec::hamming(70);
        for p in sample_points(&spec, 1, 50) {
            if let Point::Bits { words, .. } = p {
                assert_eq!(words[1] >> 6, 0);
            }
        }
    }

    #[test]
    fn single_bit_is_fair() {
        // Bin(1e5, 1/2) has sd 158; [49500, 50500] is a +-3.16 sd window,
        // two-sided mass 0.9984.
        let spec = DomainSpec::hamming(1);
        let ones: u32 = sample_points(&spec, 11, 100_000)
            .iter()
            .map(|p| p.weight().unwrap())
            .sum();
        let frac = ones as f64 / 1e5;
        assert!((0.495..=0.505).contains(&frac), "fraction {frac}");
    }

    #[test]
    fn sphere_points_have_unit_norm() {
        let spec = DomainSpec::sphere(3);
        for p in sample_points(&spec, 5, 100) {
            let n = p
                .coords()
                .unwrap()
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            assert!((n - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mean_distance_matches_closed_forms() {
        let h = mean_distance_estimate(&DomainSpec::hamming(64), 1, 100_000).unwrap();
        assert!((0.49..=0.51).contains(&h.mean), "{h:?}");
        let c = mean_distance_estimate(&DomainSpec::unit_cube(64), 1, 100_000).unwrap();
        assert!((0.38..=0.44).contains(&c.mean), "{c:?}");
        let g = mean_distance_estimate(&DomainSpec::gaussian(64), 1, 100_000).unwrap();
        assert!((0.97..=1.03).contains(&g.mean), "{g:?}");
        assert!(mean_distance_estimate(&DomainSpec::hamming(4), 1, 0).is_err());
    }

    #[test]
    fn mean_distance_is_order_one_across_dimensions() {
        for kind in DomainKind::ALL {
            for d in [32, 64, 128] {
                let spec = DomainSpec::new(kind, d).unwrap();
                let s = mean_distance_estimate(&spec, 2, 20_000).unwrap();
                assert!((0.3..=1.2).contains(&s.mean), "{spec}: {}", s.mean);
            }
        }
    }
}
