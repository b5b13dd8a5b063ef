//! System-level false-alarm and detection probabilities of the test
//! `y_k >= gamma`, threshold calibration and ROC curves.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::stats::Cdf;
use crate::steady::SteadyStateCdf;

/// `(P_f, P_d) = (1 - F_0(gamma), 1 - F_1(gamma))`.
pub fn pf_pd<C0: Cdf + ?Sized, C1: Cdf + ?Sized>(h0: &C0, h1: &C1, gamma: f64) -> (f64, f64) {
    (1.0 - h0.cdf(gamma), 1.0 - h1.cdf(gamma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdChoice {
    pub gamma: f64,
    pub achieved_pf: f64,
}

/// Smallest grid threshold whose false-alarm rate does not exceed `target`.
pub fn threshold_for_pf<C: Cdf + ?Sized>(h0: &C, grid: &[f64], target: f64) -> Result<ThresholdChoice> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidArgument(format!("target P_f = {target} outside (0, 1)")));
    }
    grid.iter()
        .map(|&g| (g, 1.0 - h0.cdf(g)))
        .find(|&(_, pf)| pf <= target)
        .map(|(gamma, achieved_pf)| ThresholdChoice { gamma, achieved_pf })
        .ok_or(Error::UnreachableTarget(target))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RocSource {
    Analytical,
    Empirical,
}

impl RocSource {
    pub fn name(self) -> &'static str {
        match self {
            RocSource::Analytical => "analytical",
            RocSource::Empirical => "empirical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub gamma: f64,
    pub pf: f64,
    pub pd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub node: usize,
    pub source: RocSource,
    /// Ordered by increasing `gamma`.
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// Best detection probability reachable with `P_f <= pf`.
    pub fn pd_at_pf(&self, pf: f64) -> f64 {
        self.points.iter().filter(|p| p.pf <= pf).map(|p| p.pd).fold(0.0, f64::max)
    }
}

/// Sweeps `gamma` over an ascending grid.
pub fn roc<C0: Cdf + ?Sized, C1: Cdf + ?Sized>(h0: &C0, h1: &C1, grid: &[f64], node: usize, source: RocSource) -> RocCurve {
    let points = grid
        .iter()
        .map(|&gamma| {
            let (pf, pd) = pf_pd(h0, h1, gamma);
            RocPoint { gamma, pf, pd }
        })
        .collect();
    RocCurve { node, source, points }
}

/// Largest `|P_d^a - P_d^b|` over thresholds shared by both curves.
pub fn max_pd_gap_matched_gamma(a: &RocCurve, b: &RocCurve) -> f64 {
    a.points
        .iter()
        .zip(&b.points)
        .filter(|(p, q)| p.gamma == q.gamma)
        .map(|(p, q)| (p.pd - q.pd).abs())
        .fold(0.0, f64::max)
}

/// Smallest `pd_a(pf) - pd_b(pf)` over `pfs`; negative values mean `b` beats `a`.
pub fn min_dominance_margin(a: &RocCurve, b: &RocCurve, pfs: &[f64]) -> f64 {
    pfs.iter().map(|&pf| a.pd_at_pf(pf) - b.pd_at_pf(pf)).fold(f64::INFINITY, f64::min)
}

/// Threshold grid covering both hypotheses: a uniform sweep over
/// `mean ± 6 std` of each CDF, refinements around every discrete support
/// point shifted by the continuous location, and tails extended until both
/// CDFs are within `eps` of 0 and 1.
pub fn gamma_grid(h0: &SteadyStateCdf, h1: &SteadyStateCdf, uniform_points: usize, eps: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for cdf in [h0, h1] {
        let (m, s) = moment_sweep(cdf);
        let (a, b) = (m - 6.0 * s, m + 6.0 * s);
        lo = lo.min(a);
        hi = hi.max(b);
        let n = uniform_points.max(2);
        grid.extend((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64));
        let (cm, cs) = cdf.continuous_location();
        for &z in cdf.discrete_support() {
            for k in [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
                grid.push(z + cm + k * cs);
            }
        }
    }
    let width = (hi - lo).max(f64::MIN_POSITIVE);
    for _ in 0..64 {
        if h0.eval(lo) <= eps && h1.eval(lo) <= eps {
            break;
        }
        lo -= width / 4.0;
        grid.push(lo);
    }
    for _ in 0..64 {
        if h0.eval(hi) >= 1.0 - eps && h1.eval(hi) >= 1.0 - eps {
            break;
        }
        hi += width / 4.0;
        grid.push(hi);
    }
    grid.push(lo);
    grid.push(hi);
    grid.retain(|g| g.is_finite());
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Mean and standard deviation of a steady-state CDF from its effective range.
fn moment_sweep(cdf: &SteadyStateCdf) -> (f64, f64) {
    let (lo, hi) = cdf.effective_range();
    let n = 2000;
    let step = (hi - lo) / n as f64;
    let (mut m1, mut m2, mut prev) = (0.0, 0.0, cdf.eval(lo));
    for i in 1..=n {
        let y = lo + step * i as f64;
        let f = cdf.eval(y);
        let mid = y - step / 2.0;
        m1 += (f - prev) * mid;
        m2 += (f - prev) * mid * mid;
        prev = f;
    }
    (m1, libm::sqrt((m2 - m1 * m1).max(0.0)))
}
