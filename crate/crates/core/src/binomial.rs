//! Exact tails of the fair binomial distribution.
//!
//! Sums are carried out in arbitrary-precision integers and only the final
//! ratio `sum / 2^d` is rounded to `f64`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// `C(d, 0), ..., C(d, d)` as exact integers.
pub fn binomial_row(d: u32) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(d as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 0..d {
        c = c * (d - k) / (k + 1);
        row.push(c.clone());
    }
    row
}

fn ratio_to_pow2(num: &BigUint, d: u32) -> f64 {
    // keep 80 significant bits, then scale by an exact power of two
    let bits = num.bits();
    if bits == 0 {
        return 0.0;
    }
    let shift = bits.saturating_sub(80);
    let mantissa = (num >> shift).to_f64().expect("finite mantissa");
    let exp = shift as i64 - d as i64;
    mantissa * pow2(exp)
}

fn pow2(mut e: i64) -> f64 {
    let mut v = 1.0f64;
    while e > 0 {
        let s = e.min(1000);
        v *= 2f64.powi(s as i32);
        e -= s;
    }
    while e < 0 {
        let s = (-e).min(1000);
        v /= 2f64.powi(s as i32);
        e += s;
    }
    v
}

/// `P(Bin(d, 1/2) >= k)`.
pub fn tail_ge(d: u32, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > d {
        return 0.0;
    }
    let row = binomial_row(d);
    let sum = row[k as usize..].iter().fold(BigUint::zero(), |a, c| a + c);
    ratio_to_pow2(&sum, d)
}

/// `P(Bin(d, 1/2) <= k)`.
pub fn cdf_le(d: u32, k: u32) -> f64 {
    if k >= d {
        return 1.0;
    }
    let row = binomial_row(d);
    let sum = row[..=k as usize]
        .iter()
        .fold(BigUint::zero(), |a, c| a + c);
    ratio_to_pow2(&sum, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_matches_pascal() {
        let r: Vec<u64> = binomial_row(6)
            .iter()
            .map(|c| c.to_u64().unwrap())
            .collect();
        assert_eq!(r, vec![1, 6, 15, 20, 15, 6, 1]);
    }

    #[test]
    fn tails_agree_with_floating_recurrence() {
        // independent route: pmf by the multiplicative recurrence in f64
        for d in [1u32, 7, 50, 120] {
            let mut pmf = vec![0.5f64.powi(d as i32)];
            for k in 0..d {
                let next = pmf[k as usize] * (d - k) as f64 / (k + 1) as f64;
                pmf.push(next);
            }
            for k in 0..=d + 1 {
                let direct: f64 = pmf.iter().skip(k as usize).sum();
                assert!((tail_ge(d, k) - direct).abs() < 1e-13, "d={d} k={k}");
                if k <= d {
                    let below: f64 = pmf[..=k as usize].iter().sum();
                    assert!((cdf_le(d, k) - below).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn large_dimensions_stay_finite() {
        let p = tail_ge(2000, 1000);
        assert!(p > 0.5 && p < 0.51);
        assert!(tail_ge(2000, 1900) >= 0.0);
    }
}
