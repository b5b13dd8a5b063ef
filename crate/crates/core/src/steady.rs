//! Steady-state CDF of `y_k(inf) = u_k(inf) + z_k(inf)`.

use alloc::format;

use crate::continuous::{build_continuous_cdf_with, ContinuousCdf, SeriesPlan, SeriesSettings, DEFAULT_TABLE_POINTS};
use crate::discrete::{discrete_component_for, DiscreteOptions, DiscretePmf};
use crate::error::{Error, Result};
use crate::math::normal_cdf_with;
use crate::model::{Hypothesis, ObservationModel};
use crate::network::{NetworkSpec, NodeParams};

use alloc::vec::Vec;

/// Handover thresholds to the Gaussian limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeThresholds {
    pub eta: f64,
    pub a: f64,
}

impl Default for ModeThresholds {
    fn default() -> Self {
        Self { eta: 0.97, a: 0.95 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Mixture,
    GaussianLimit,
}

/// Gaussian limit only when both the memory factor and the self-weight are
/// close to one.
pub fn select_mode(node: &NodeParams, thresholds: &ModeThresholds) -> Mode {
    if node.eta >= thresholds.eta && node.a >= thresholds.a {
        Mode::GaussianLimit
    } else {
        Mode::Mixture
    }
}

/// Limit mean and standard deviation of `y_k(n)` as `n -> inf`.
pub fn limit_moments<M: ObservationModel + ?Sized>(
    model: &M,
    network: &NetworkSpec,
    k: usize,
    mu: f64,
    h: Hypothesis,
) -> Result<(f64, f64)> {
    let node = network.node_params(k, mu)?;
    limit_moments_for(model, &node, network.offdiag_square_sum(k), h)
}

/// [`limit_moments`] from node parameters and `sum_{l != k} a_{kl}^2`.
pub fn limit_moments_for<M: ObservationModel + ?Sized>(model: &M, node: &NodeParams, offdiag_sq: f64, h: Hypothesis) -> Result<(f64, f64)> {
    let eta = node.eta;
    if !(eta < 1.0) {
        return Err(Error::DegenerateMemory(eta));
    }
    let (a, mu) = (node.a, node.mu);
    let m = (mu * a * model.mean(h) + (1.0 - a) * model.message_mean(h)) / (1.0 - eta);
    let s2 = (mu * mu * a * a * model.variance(h) + model.message_variance(h) * offdiag_sq) / (1.0 - eta * eta);
    Ok((m, libm::sqrt(s2)))
}

/// Exact mean and standard deviation of `y_k(n)` after `n` steps from zero.
pub fn finite_moments_for<M: ObservationModel + ?Sized>(
    model: &M,
    node: &NodeParams,
    offdiag_sq: f64,
    h: Hypothesis,
    n: u32,
) -> Result<(f64, f64)> {
    let (m, s) = limit_moments_for(model, node, offdiag_sq, h)?;
    let decay = libm::pow(node.eta, n as f64);
    Ok((m * (1.0 - decay), s * libm::sqrt(1.0 - decay * decay)))
}

pub fn gaussian_limit_cdf(y: f64, m: f64, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("standard deviation {s} must be positive")));
    }
    Ok(normal_cdf_with(y, m, s))
}

/// `sum_i nu_i F_u(y - z_i)`.
pub fn mixture_cdf(y: f64, pmf: &DiscretePmf, cont: &ContinuousCdf) -> f64 {
    pmf.iter().map(|(z, nu)| nu * cont.eval(y - z)).sum::<f64>().clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SteadyKind {
    Mixture { pmf: DiscretePmf, cont: ContinuousCdf },
    GaussianLimit { mean: f64, std: f64 },
}

/// Evaluable steady-state CDF of one node under one hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateCdf {
    pub node: usize,
    pub h: Hypothesis,
    pub kind: SteadyKind,
}

impl SteadyStateCdf {
    pub fn mode(&self) -> Mode {
        match self.kind {
            SteadyKind::Mixture { .. } => Mode::Mixture,
            SteadyKind::GaussianLimit { .. } => Mode::GaussianLimit,
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match &self.kind {
            SteadyKind::Mixture { pmf, cont } => mixture_cdf(y, pmf, cont),
            SteadyKind::GaussianLimit { mean, std } => normal_cdf_with(y, *mean, *std),
        }
    }

    /// Interval outside which the CDF is numerically 0 or 1.
    pub fn effective_range(&self) -> (f64, f64) {
        match &self.kind {
            SteadyKind::Mixture { pmf, cont } => {
                let (lo, hi) = cont.effective_range();
                let z = pmf.points();
                (lo + z[0], hi + z[z.len() - 1])
            }
            SteadyKind::GaussianLimit { mean, std } => (mean - 10.0 * std, mean + 10.0 * std),
        }
    }

    /// Support points of the discrete component (empty in the Gaussian limit).
    pub fn discrete_support(&self) -> &[f64] {
        match &self.kind {
            SteadyKind::Mixture { pmf, .. } => pmf.points(),
            SteadyKind::GaussianLimit { .. } => &[],
        }
    }

    /// Location and spread of the continuous component.
    pub fn continuous_location(&self) -> (f64, f64) {
        match &self.kind {
            SteadyKind::Mixture { cont, .. } => continuous_location(cont),
            SteadyKind::GaussianLimit { mean, std } => (*mean, *std),
        }
    }

    /// Mean of the analytical distribution.
    pub fn mean(&self) -> f64 {
        match &self.kind {
            SteadyKind::Mixture { pmf, cont } => pmf.mean() + continuous_mean(cont),
            SteadyKind::GaussianLimit { mean, .. } => *mean,
        }
    }
}

fn continuous_mean(cont: &ContinuousCdf) -> f64 {
    continuous_location(cont).0
}

/// Mean and standard deviation of the continuous component.
pub fn continuous_location(cont: &ContinuousCdf) -> (f64, f64) {
    match cont {
        ContinuousCdf::Gaussian { mean, std } => (*mean, *std),
        ContinuousCdf::Table(t) => {
            let (g, v) = (t.grid(), t.values());
            let last = g.len() - 1;
            let mut m1 = g[0] * v[0] + g[last] * (1.0 - v[last]);
            let mut m2 = g[0] * g[0] * v[0] + g[last] * g[last] * (1.0 - v[last]);
            for i in 1..g.len() {
                let mid = 0.5 * (g[i] + g[i - 1]);
                let mass = v[i] - v[i - 1];
                m1 += mass * mid;
                m2 += mass * mid * mid;
            }
            (m1, libm::sqrt((m2 - m1 * m1).max(0.0)))
        }
    }
}

/// Full configuration of the analytical pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalysisOptions {
    pub series: SeriesSettings,
    pub discrete: DiscreteOptions,
    pub thresholds: ModeThresholds,
    pub table_points: Option<usize>,
}

impl AnalysisOptions {
    fn points(&self) -> usize {
        self.table_points.unwrap_or(DEFAULT_TABLE_POINTS)
    }
}

/// Builds the steady-state CDF of node `k` under `h`.
pub fn analyze_node<M: ObservationModel + ?Sized>(
    model: &M,
    network: &NetworkSpec,
    k: usize,
    mu: f64,
    h: Hypothesis,
    options: &AnalysisOptions,
) -> Result<SteadyStateCdf> {
    analyze_node_with(model, network, k, mu, h, options, |plan, grid| {
        grid.iter().map(|&u| plan.evaluate(u).raw).collect()
    })
}

/// [`analyze_node`] with a caller-supplied grid evaluator for the
/// continuous-component table.
pub fn analyze_node_with<M, F>(
    model: &M,
    network: &NetworkSpec,
    k: usize,
    mu: f64,
    h: Hypothesis,
    options: &AnalysisOptions,
    evaluate_grid: F,
) -> Result<SteadyStateCdf>
where
    M: ObservationModel + ?Sized,
    F: FnOnce(&SeriesPlan, &[f64]) -> Vec<f64>,
{
    let node = network.node_params(k, mu)?;
    if select_mode(&node, &options.thresholds) == Mode::GaussianLimit {
        let (mean, std) = limit_moments_for(model, &node, network.offdiag_square_sum(k), h)?;
        return Ok(SteadyStateCdf {
            node: k,
            h,
            kind: SteadyKind::GaussianLimit { mean, std },
        });
    }
    let pmf = discrete_component_for(model, &node, h, &options.discrete)?;
    let cont = build_continuous_cdf_with(model, &node, h, options.series, options.points(), evaluate_grid)?;
    Ok(SteadyStateCdf {
        node: k,
        h,
        kind: SteadyKind::Mixture { pmf, cont },
    })
}

/// Assembles a mixture from prebuilt components (used by callers that cache
/// continuous tables across nodes).
pub fn assemble_mixture(node: usize, h: Hypothesis, pmf: DiscretePmf, cont: ContinuousCdf) -> SteadyStateCdf {
    SteadyStateCdf {
        node,
        h,
        kind: SteadyKind::Mixture { pmf, cont },
    }
}

impl crate::stats::Cdf for SteadyStateCdf {
    fn cdf(&self, y: f64) -> f64 {
        self.eval(y)
    }
}
