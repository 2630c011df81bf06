use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Natural,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

/// VC dimension bound `4s(t + 2)` for a class computed by a program with
/// `s` real parameters and at most `t` arithmetic operations and branches.
pub fn goldberg_jerrum_bound(s: u64, t: u64) -> u64 {
    assert!(s >= 1 && t >= 1, "s and t must be positive");
    4 * s * (t + 2)
}

/// VC dimension bound `4hp log2(2hp)` for the bins of depth-`h` trees whose
/// decision functions come from a class of VC dimension `p`.
pub fn bins_class_bound(h: u64, p: u64) -> f64 {
    bins_class_bound_with_base(h, p, LogBase::Two)
}

pub fn bins_class_bound_with_base(h: u64, p: u64, base: LogBase) -> f64 {
    assert!(h >= 1 && p >= 1, "h and p must be positive");
    let hp = (h * p) as f64;
    4.0 * hp * base.log(2.0 * hp)
}

/// Sample size after which, with probability at least `1 - delta`, the
/// empirical measure of every concept in a class of VC dimension `d` is
/// within `eps` of its true measure:
/// `ceil((128/eps^2) (d ln((2e^2/eps) ln(2e/eps)) + ln(8/delta)))`.
pub fn sample_size_bound(eps: f64, delta: f64, d: u64) -> Result<u64> {
    sample_size_bound_with_base(eps, delta, d, LogBase::Natural)
}

pub fn sample_size_bound_with_base(eps: f64, delta: f64, d: u64, base: LogBase) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("must lie in (0, 1), got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if d == 0 {
        return Err(invalid("d", "must be positive"));
    }
    let e = std::f64::consts::E;
    let inner = (2.0 * e * e / eps) * base.log(2.0 * e / eps);
    let n = 128.0 / (eps * eps) * (d as f64 * base.log(inner) + base.log(8.0 / delta));
    Ok(n.ceil() as u64)
}

/// `d + floor(log2 d)`: an upper bound on the VC dimension of Hamming balls
/// in `{0,1}^d`.
pub fn hamming_ball_vc_upper(d: usize) -> usize {
    assert!(d >= 1, "d must be positive");
    d + d.ilog2() as usize
}

/// `ceil(log2 |class|)`: no finite class shatters more points than this.
pub fn finite_class_bound(size: usize) -> usize {
    assert!(size >= 1, "class must be non-empty");
    size.next_power_of_two().trailing_zeros() as usize
}
