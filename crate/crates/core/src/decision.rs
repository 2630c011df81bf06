//! 1-Lipschitz decision functions for metric-tree nodes.
//!
//! A node's function sends a point to the minus child when its value is
//! negative and to the plus child when it is positive; the builders put
//! exact zeros on the minus side. Because every variant is 1-Lipschitz,
//! `f(w) >= eps` certifies that no point on the minus side lies within `eps`
//! of `w`, and `f(w) <= -eps` does the same for the plus side.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::domain::{DomainKind, DomainSpec, Point};
use crate::error::{invalid, Result};
use crate::rng::{substream, Stream};

#[derive(Clone, Debug, PartialEq)]
pub enum DecisionFunction {
    /// `f(w) = (rho(plus, w) - rho(minus, w)) / 2`, the vp-tree split.
    VantagePair { plus: Point, minus: Point },
    /// `f(w) = rho(center, w) - radius`, with `radius` the stored covering
    /// radius of the minus side (M-tree style).
    Ball { center: Point, radius: f64 },
    /// `f(w) = rho(anchor, w) - threshold`.
    Pivot { anchor: Point, threshold: f64 },
}

impl DecisionFunction {
    pub fn vantage_pair(spec: &DomainSpec, plus: Point, minus: Point) -> Result<Self> {
        spec.check(&plus)?;
        spec.check(&minus)?;
        if plus == minus {
            return Err(invalid("vantage_pair", "vantage points must differ"));
        }
        Ok(DecisionFunction::VantagePair { plus, minus })
    }

    pub fn ball(spec: &DomainSpec, center: Point, radius: f64) -> Result<Self> {
        spec.check(&center)?;
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(invalid(
                "radius",
                format!("must be finite and non-negative, got {radius}"),
            ));
        }
        Ok(DecisionFunction::Ball { center, radius })
    }

    pub fn pivot(spec: &DomainSpec, anchor: Point, threshold: f64) -> Result<Self> {
        spec.check(&anchor)?;
        if !threshold.is_finite() {
            return Err(invalid("threshold", "must be finite"));
        }
        Ok(DecisionFunction::Pivot { anchor, threshold })
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            DecisionFunction::VantagePair { .. } => "vantage_pair",
            DecisionFunction::Ball { .. } => "ball",
            DecisionFunction::Pivot { .. } => "pivot",
        }
    }

    /// Checked evaluation.
    pub fn evaluate(&self, spec: &DomainSpec, w: &Point) -> Result<f64> {
        spec.check(w)?;
        Ok(self.eval(spec, w))
    }

    /// Evaluation for a point already known to belong to `spec`.
    #[inline]
    pub fn eval(&self, spec: &DomainSpec, w: &Point) -> f64 {
        match self {
            DecisionFunction::VantagePair { plus, minus } => {
                0.5 * (spec.dist(plus, w) - spec.dist(minus, w))
            }
            DecisionFunction::Ball { center, radius } => spec.dist(center, w) - radius,
            DecisionFunction::Pivot { anchor, threshold } => spec.dist(anchor, w) - threshold,
        }
    }
}

/// Largest `|f(x) - f(y)| - rho(x, y)` over sampled pairs.
pub fn check_lipschitz(
    f: &DecisionFunction,
    spec: &DomainSpec,
    seed: u64,
    trials: usize,
) -> Result<f64> {
    check_lipschitz_with(spec, seed, trials, |w| f.eval(spec, w))
}

/// Lipschitz probe for an arbitrary real function on a domain.
///
/// Half of the pairs are independent draws from the domain measure; the
/// other half pair a draw with a small perturbation of itself (one flipped
/// bit on the cube, a short Gaussian step elsewhere), which is where
/// violations of a steep function show up.
pub fn check_lipschitz_with<F>(spec: &DomainSpec, seed: u64, trials: usize, f: F) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let mut rng = substream(seed, Stream::Trials, 0);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..trials {
        let x = spec.sample(&mut rng);
        let y = if i % 2 == 0 {
            spec.sample(&mut rng)
        } else {
            perturb(spec, &x, &mut rng)
        };
        let gap = (f(&x) - f(&y)).abs() - spec.dist(&x, &y);
        worst = worst.max(gap);
    }
    Ok(worst)
}

fn perturb<R: Rng + ?Sized>(spec: &DomainSpec, x: &Point, rng: &mut R) -> Point {
    match x {
        Point::Bits { len, words } => {
            let mut words = words.clone();
            let i = rng.random_range(0..*len);
            words[i / 64] ^= 1 << (i % 64);
            Point::Bits { len: *len, words }
        }
        Point::Real(v) => {
            let step = 0.05 * rng.random::<f64>();
            let mut y: Vec<f64> = v
                .iter()
                .map(|c| {
                    c + step * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
                })
                .collect();
            match spec.kind {
                DomainKind::UnitCube => y.iter_mut().for_each(|c| *c = c.clamp(0.0, 1.0)),
                DomainKind::Sphere => {
                    let n = y.iter().map(|c| c * c).sum::<f64>().sqrt();
                    y.iter_mut().for_each(|c| *c /= n);
                }
                _ => {}
            }
            Point::Real(y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::sample_points;

    fn bits(s: &str) -> Point {
        Point::from_bit_str(s).unwrap()
    }

    #[test]
    fn vantage_pair_at_its_plus_point_is_negative() {
        let spec = DomainSpec::hamming(4);
        let f = DecisionFunction::vantage_pair(&spec, bits("0000"), bits("1111")).unwrap();
        assert_eq!(f.evaluate(&spec, &bits("0000")).unwrap(), -0.5);
        // rho(0000, 0011) = rho(1111, 0011) = 0.5
        assert_eq!(f.evaluate(&spec, &bits("0011")).unwrap(), 0.0);
    }

    #[test]
    fn ball_at_center_is_minus_radius() {
        let spec = DomainSpec::unit_cube(3);
        let c = Point::Real(vec![0.2, 0.4, 0.9]);
        let f = DecisionFunction::ball(&spec, c.clone(), 0.3).unwrap();
        assert_eq!(f.evaluate(&spec, &c).unwrap(), -0.3);
    }

    #[test]
    fn constructors_enforce_invariants() {
        let spec = DomainSpec::hamming(4);
        assert!(DecisionFunction::vantage_pair(&spec, bits("0101"), bits("0101")).is_err());
        assert!(DecisionFunction::ball(&spec, bits("0101"), -0.1).is_err());
        assert!(DecisionFunction::pivot(&spec, bits("0101"), f64::NAN).is_err());
        let f = DecisionFunction::ball(&spec, bits("0101"), 0.25).unwrap();
        assert!(f.evaluate(&spec, &bits("01010")).is_err());
    }

    #[test]
    fn evaluation_is_pure() {
        let spec = DomainSpec::gaussian(8);
        let pts = sample_points(&spec, 1, 3);
        let f = DecisionFunction::vantage_pair(&spec, pts[0].clone(), pts[1].clone()).unwrap();
        assert_eq!(
            f.eval(&spec, &pts[2]).to_bits(),
            f.eval(&spec, &pts[2]).to_bits()
        );
    }

    #[test]
    fn shipped_variants_are_lipschitz() {
        for kind in DomainKind::ALL {
            let spec = DomainSpec::new(kind, 12).unwrap();
            let pts = sample_points(&spec, 2, 3);
            let fs = [
                DecisionFunction::vantage_pair(&spec, pts[0].clone(), pts[1].clone()).unwrap(),
                DecisionFunction::ball(&spec, pts[2].clone(), 0.4).unwrap(),
                DecisionFunction::pivot(&spec, pts[1].clone(), 0.5).unwrap(),
            ];
            for f in &fs {
                let v = check_lipschitz(f, &spec, 3, 20_000).unwrap();
                assert!(v <= 1e-9, "{kind} {}: {v}", f.variant_name());
            }
        }
    }

    #[test]
    fn doubled_function_is_caught() {
        let spec = DomainSpec::hamming(8);
        let c = sample_points(&spec, 4, 1).pop().unwrap();
        let f = DecisionFunction::ball(&spec, c, 0.25).unwrap();
        let v = check_lipschitz_with(&spec, 5, 1000, |w| 2.0 * f.eval(&spec, w)).unwrap();
        assert!(v > 0.0);
    }
}
