//! Discrete component `z_k(inf)`: asymmetric Bernoulli convolutions driven
//! by the neighbors' one-bit messages.
//!
//! On the normalized scale each neighbor contributes
//! `z = sum_{i>=0} (1 - eta) eta^i b(i)` with `b(i) = +1` w.p. `p`. Truncating
//! after `omega` digits and keeping at most one (first order) or two (second
//! order) minus signs yields the tables built here.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::continuous::moments;
use crate::error::{Error, Result};
use crate::model::{Hypothesis, ObservationModel};
use crate::network::{NetworkSpec, NodeParams};

/// Tolerance on the total probability of a PMF.
pub const PMF_SUM_TOL: f64 = 1e-10;
/// Default cap on the pre-merge support size of a convolution step.
pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;

/// Finite distribution with strictly ascending support.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePmf {
    points: Vec<f64>,
    probs: Vec<f64>,
    merge_tol: f64,
}

impl DiscretePmf {
    /// Sorts `(point, prob)` pairs and combines exact ties.
    pub fn new(points: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if points.len() != probs.len() || points.is_empty() {
            return Err(Error::InvalidPmf("points and probabilities must be non-empty and aligned".into()));
        }
        let mut pairs: Vec<(f64, f64)> = points.into_iter().zip(probs).collect();
        for &(x, p) in &pairs {
            if !x.is_finite() || !(p >= 0.0) || p > 1.0 + PMF_SUM_TOL {
                return Err(Error::InvalidPmf(format!("bad atom ({x}, {p})")));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut pts: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut prs: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, p) in pairs {
            if pts.last() == Some(&x) {
                *prs.last_mut().unwrap() += p;
            } else {
                pts.push(x);
                prs.push(p);
            }
        }
        let total: f64 = prs.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidPmf(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            points: pts,
            probs: prs,
            merge_tol: 0.0,
        })
    }

    pub fn point_mass(x: f64) -> Self {
        Self {
            points: vec![x],
            probs: vec![1.0],
            merge_tol: 0.0,
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(x, p)| x * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter().map(|(x, p)| p * (x - m) * (x - m)).sum()
    }

    /// `P(Z <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.points.partition_point(|&z| z <= x);
        self.probs[..n].iter().sum::<f64>().min(1.0)
    }

    /// Drops null atoms and merges neighbors closer than `tol` into their
    /// probability-weighted mean until every gap is at least `tol`.
    pub fn merged(&self, tol: f64) -> Self {
        let mut stack: Vec<(f64, f64)> = Vec::with_capacity(self.points.len());
        for (x, p) in self.iter() {
            if p == 0.0 {
                continue;
            }
            stack.push((x, p));
            while stack.len() >= 2 {
                let (x1, p1) = stack[stack.len() - 1];
                let (x0, p0) = stack[stack.len() - 2];
                if x1 != x0 && x1 - x0 >= tol {
                    break;
                }
                stack.pop();
                let w = p0 + p1;
                *stack.last_mut().unwrap() = ((x0 * p0 + x1 * p1) / w, w);
            }
        }
        if stack.is_empty() {
            // all mass was zero; cannot happen for a validated PMF
            stack.push((self.points[0], 1.0));
        }
        let (points, probs) = stack.into_iter().unzip();
        Self {
            points,
            probs,
            merge_tol: self.merge_tol.max(tol),
        }
    }

    /// Image under `z -> scale z + shift`, `scale > 0`.
    pub fn affine(&self, scale: f64, shift: f64) -> Self {
        Self {
            points: self.points.iter().map(|&z| scale * z + shift).collect(),
            probs: self.probs.clone(),
            merge_tol: self.merge_tol * scale,
        }
    }

    /// Distribution of `-Z`.
    pub fn negated(&self) -> Self {
        Self {
            points: self.points.iter().rev().map(|&z| -z).collect(),
            probs: self.probs.iter().rev().copied().collect(),
            merge_tol: self.merge_tol,
        }
    }

    /// Total variation distance, matching atoms by exact location.
    pub fn total_variation(&self, other: &Self) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.len() || j < other.len() {
            let a = self.points.get(i).copied().unwrap_or(f64::INFINITY);
            let b = other.points.get(j).copied().unwrap_or(f64::INFINITY);
            if a == b {
                acc += (self.probs[i] - other.probs[j]).abs();
                i += 1;
                j += 1;
            } else if a < b {
                acc += self.probs[i];
                i += 1;
            } else {
                acc += other.probs[j];
                j += 1;
            }
        }
        acc / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ApproxOrder {
    First,
    Second,
}

/// Parameters of one normalized Bernoulli-convolution table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliApproxSpec {
    /// Probability of a `+1` digit.
    pub p: f64,
    pub eta: f64,
    pub omega: usize,
    pub order: ApproxOrder,
}

impl BernoulliApproxSpec {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) || !(self.eta >= 0.0 && self.eta < 1.0) || self.omega == 0 {
            return Err(Error::InvalidArgument(format!("invalid Bernoulli table spec {self:?}")));
        }
        Ok(())
    }

    /// Merge tolerance `2 eta^omega` for the normalized table.
    pub fn merge_tol(&self) -> f64 {
        2.0 * libm::pow(self.eta, self.omega as f64)
    }
}

/// One table row: positions (0-based) of the first and second minus digit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub first_minus: Option<usize>,
    pub second_minus: Option<usize>,
    pub value: f64,
    pub prob: f64,
}

fn digit_weight(eta: f64, i: usize) -> f64 {
    2.0 * libm::pow(eta, i as f64) * (1.0 - eta)
}

/// Raw table rows before sorting or merging.
pub fn table_rows(spec: &BernoulliApproxSpec) -> Result<Vec<TableRow>> {
    spec.validate()?;
    let BernoulliApproxSpec { p, eta, omega, order } = *spec;
    let q = 1.0 - p;
    let pw = |k: usize| libm::pow(p, k as f64);
    let mut rows = Vec::new();
    match order {
        ApproxOrder::First => {
            for i in 0..omega {
                rows.push(TableRow {
                    first_minus: Some(i),
                    second_minus: None,
                    value: 1.0 - digit_weight(eta, i),
                    prob: q * pw(i),
                });
            }
        }
        ApproxOrder::Second => {
            for i in 0..omega {
                for j in i + 1..omega {
                    rows.push(TableRow {
                        first_minus: Some(i),
                        second_minus: Some(j),
                        value: 1.0 - digit_weight(eta, i) - digit_weight(eta, j),
                        prob: q * q * pw(j - 1),
                    });
                }
            }
            for i in 0..omega {
                rows.push(TableRow {
                    first_minus: Some(i),
                    second_minus: None,
                    value: 1.0 - digit_weight(eta, i),
                    prob: q * pw(omega - 1),
                });
            }
        }
    }
    rows.push(TableRow {
        first_minus: None,
        second_minus: None,
        value: 1.0,
        prob: pw(omega),
    });
    Ok(rows)
}

fn rows_to_pmf(rows: &[TableRow]) -> Result<DiscretePmf> {
    DiscretePmf::new(rows.iter().map(|r| r.value).collect(), rows.iter().map(|r| r.prob).collect())
}

/// First-order table on the normalized scale, merged at `2 eta^omega`.
pub fn table_first_order(spec: &BernoulliApproxSpec) -> Result<DiscretePmf> {
    let s = BernoulliApproxSpec {
        order: ApproxOrder::First,
        ..*spec
    };
    Ok(rows_to_pmf(&table_rows(&s)?)?.merged(s.merge_tol()))
}

/// Second-order table on the normalized scale, merged at `2 eta^omega`.
pub fn table_second_order(spec: &BernoulliApproxSpec) -> Result<DiscretePmf> {
    let s = BernoulliApproxSpec {
        order: ApproxOrder::Second,
        ..*spec
    };
    Ok(rows_to_pmf(&table_rows(&s)?)?.merged(s.merge_tol()))
}

/// Normalized table for the configured order.
pub fn normalized_pmf(spec: &BernoulliApproxSpec) -> Result<DiscretePmf> {
    match spec.order {
        ApproxOrder::First => table_first_order(spec),
        ApproxOrder::Second => table_second_order(spec),
    }
}

/// `P(at least two minus digits among omega)`.
pub fn first_order_neglected_mass(p: f64, omega: usize) -> f64 {
    let w = omega as f64;
    1.0 - libm::pow(p, w) - w * libm::pow(p, w - 1.0) * (1.0 - p)
}

/// `P(at least three minus digits among omega)`.
pub fn second_order_neglected_mass(p: f64, omega: usize) -> f64 {
    let w = omega as f64;
    let q = 1.0 - p;
    first_order_neglected_mass(p, omega) - w * (w - 1.0) / 2.0 * libm::pow(p, w - 2.0) * q * q
}

/// Smallest number of digits keeping the state-level truncation error below
/// `eps`.
pub fn omega_k<M: ObservationModel + ?Sized>(model: &M, node: &NodeParams, eps: f64) -> Result<usize> {
    let eta = node.eta;
    if !(eta < 1.0) {
        return Err(Error::DegenerateMemory(eta));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must be positive")));
    }
    if eta <= 0.0 {
        return Ok(1);
    }
    let gap = model.mean(Hypothesis::H1) - model.mean(Hypothesis::H0);
    let w = libm::ceil(libm::log(gap / (eps * (1.0 - eta))) / libm::log(1.0 / eta));
    Ok(if w < 1.0 { 1 } else { w as usize })
}

/// Maps a normalized PMF to the state-scale contribution of neighbor `ell`.
pub fn neighbor_component_pmf<M: ObservationModel + ?Sized>(
    zhat: &DiscretePmf,
    model: &M,
    node: &NodeParams,
    ell: usize,
) -> Result<DiscretePmf> {
    let c = node.c_row.get(ell).copied().unwrap_or(0.0);
    if ell == node.k || !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "node {ell} is not a weighted neighbor of {}",
            node.k
        )));
    }
    let e1 = model.mean(Hypothesis::H1);
    let e0 = model.mean(Hypothesis::H0);
    let k = c / (1.0 - node.eta);
    Ok(zhat.affine(k * (e1 - e0) / 2.0, k * (e1 + e0) / 2.0))
}

/// Convolves the PMFs left to right, merging at `merge_tol` after each step.
pub fn convolve(pmfs: &[DiscretePmf], merge_tol: f64, cap: usize) -> Result<DiscretePmf> {
    let (first, rest) = pmfs
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("nothing to convolve".into()))?;
    let mut acc = first.clone();
    for next in rest {
        let size = acc.len().saturating_mul(next.len());
        if size > cap {
            return Err(Error::SupportExplosion { size, cap });
        }
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(size);
        for (x, p) in acc.iter() {
            for (y, q) in next.iter() {
                pairs.push((x + y, p * q));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (points, probs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let raw = DiscretePmf {
            points,
            probs,
            merge_tol: acc.merge_tol.max(next.merge_tol),
        };
        // merging with tolerance 0 combines exact ties only
        acc = raw.merged(merge_tol);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteOptions {
    pub order: ApproxOrder,
    /// `eps_{k,h}` as a fraction of the continuous-component standard deviation.
    pub eps_fraction: f64,
    /// Absolute `eps_{k,h}`; overrides `eps_fraction` when set.
    pub eps_absolute: Option<f64>,
    pub support_cap: usize,
}

impl Default for DiscreteOptions {
    fn default() -> Self {
        Self {
            order: ApproxOrder::Second,
            eps_fraction: 0.1,
            eps_absolute: None,
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }
}

/// Resolved `eps_{k,h}` for a node and hypothesis.
pub fn eps_kh<M: ObservationModel + ?Sized>(model: &M, node: &NodeParams, h: Hypothesis, options: &DiscreteOptions) -> Result<f64> {
    match options.eps_absolute {
        Some(e) => Ok(e),
        None => Ok(options.eps_fraction * moments(model, node, h)?.std()),
    }
}

/// Normalized table for hypothesis `h`; under `H0` the table is built for
/// `-z` with success probability `1 - p_f` and negated.
pub fn hypothesis_table<M: ObservationModel + ?Sized>(
    model: &M,
    eta: f64,
    omega: usize,
    h: Hypothesis,
    order: ApproxOrder,
) -> Result<DiscretePmf> {
    match h {
        Hypothesis::H1 => normalized_pmf(&BernoulliApproxSpec {
            p: model.p_d(),
            eta,
            omega,
            order,
        }),
        Hypothesis::H0 => Ok(normalized_pmf(&BernoulliApproxSpec {
            p: 1.0 - model.p_f(),
            eta,
            omega,
            order,
        })?
        .negated()),
    }
}

/// PMF of `z_k(inf)` under `h`.
pub fn discrete_component<M: ObservationModel + ?Sized>(
    model: &M,
    network: &NetworkSpec,
    k: usize,
    mu: f64,
    h: Hypothesis,
    options: &DiscreteOptions,
) -> Result<DiscretePmf> {
    let node = network.node_params(k, mu)?;
    discrete_component_for(model, &node, h, options)
}

/// [`discrete_component`] from precomputed node parameters.
pub fn discrete_component_for<M: ObservationModel + ?Sized>(
    model: &M,
    node: &NodeParams,
    h: Hypothesis,
    options: &DiscreteOptions,
) -> Result<DiscretePmf> {
    let neighbors: Vec<usize> = node.active_neighbors().map(|(l, _)| l).collect();
    if neighbors.is_empty() {
        return Ok(DiscretePmf::point_mass(0.0));
    }
    let eps = eps_kh(model, node, h, options)?;
    let omega = omega_k(model, node, eps)?;
    let table = hypothesis_table(model, node.eta, omega, h, options.order)?;
    let parts = neighbors
        .iter()
        .map(|&l| neighbor_component_pmf(&table, model, node, l))
        .collect::<Result<Vec<_>>>()?;
    let gap = model.mean(Hypothesis::H1) - model.mean(Hypothesis::H0);
    let tol = gap * libm::pow(node.eta, omega as f64) / (1.0 - node.eta);
    convolve(&parts, tol, options.support_cap)
}
