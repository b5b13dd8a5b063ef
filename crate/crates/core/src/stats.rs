//! Empirical CDFs and Kolmogorov-Smirnov distances.

use alloc::vec::Vec;

/// Anything that can be evaluated as a CDF.
pub trait Cdf {
    fn cdf(&self, y: f64) -> f64;
}

impl Cdf for EmpiricalCdf {
    fn cdf(&self, y: f64) -> f64 {
        self.eval(y)
    }
}

/// Right-continuous step CDF of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    /// Panics in debug builds on an empty sample.
    pub fn new(mut sample: Vec<f64>) -> Self {
        debug_assert!(!sample.is_empty());
        sample.sort_by(f64::total_cmp);
        Self { sorted: sample }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= y) as f64 / self.sorted.len() as f64
    }

    /// Left-continuous quantile: smallest sample with `F >= q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let idx = libm::ceil(q.clamp(0.0, 1.0) * n as f64) as usize;
        self.sorted[idx.clamp(1, n) - 1]
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    pub fn std(&self) -> f64 {
        let m = self.mean();
        let n = self.sorted.len() as f64;
        libm::sqrt(self.sorted.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0).max(1.0))
    }

    /// `sup_y |F_n(y) - F(y)|` against a continuous or stepwise reference,
    /// checked on both sides of every jump.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, reference: F) -> f64 {
        ks_statistic(&self.sorted, reference)
    }
}

/// One-sample KS statistic of an ascending sample against `cdf`.
///
/// The reference is evaluated at each sample point and just below it, which
/// also handles references with jumps.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        let f = cdf(x);
        let f_left = cdf(next_down(x));
        d = d.max((f_left - below).abs()).max((f - at).abs());
        i = j;
    }
    d
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    let (x, y) = (a.sorted(), b.sorted());
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic p-value of the Kolmogorov distribution at `sqrt(n_eff) d`.
pub fn ks_pvalue(d: f64, n_eff: f64) -> f64 {
    let lambda = (libm::sqrt(n_eff) + 0.12 + 0.11 / libm::sqrt(n_eff)) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = libm::exp(-2.0 * kf * kf * lambda * lambda);
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Effective sample size of a two-sample test.
pub fn two_sample_n(n: usize, m: usize) -> f64 {
    (n as f64 * m as f64) / (n + m) as f64
}

fn next_down(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        return x;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits - 1 } else { bits + 1 })
}
