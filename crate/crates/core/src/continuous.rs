//! Continuous component `u_k(inf) = a_k mu w*`, with `w* = sum_i eta^i x(i)`.
//!
//! The CDF is obtained by inverting the log-characteristic function
//!
//! ```text
//! F_u(u) = 1/2 - (2/pi) sum_n Im{ exp[-j u t_n / (mu a_k) + Phi_w(t_n)] } / (2n + 1),
//! t_n = (2n + 1) delta / 2,
//! ```
//!
//! where `Phi_w(t) = sum_i Phi_x(eta^i t)`. Two evaluation modes exist:
//!
//! * [`SeriesMode::Truncated`] keeps `Phi_w(t) = Phi_x(t) + sum_m eta^m phi_m t^m / (1 - eta^m)`
//!   and stops at `n_bar`, the last index for which the coefficient series
//!   converges;
//! * [`SeriesMode::Completed`] (default) peels off `R` leading terms
//!   `Phi_x(eta^i t)` in closed form so that the coefficient series is only
//!   ever evaluated well inside its disc, and keeps summing until the
//!   characteristic function has decayed below `eps' / 100`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::normal_cdf_with;
use crate::model::{Hypothesis, ObservationModel};
use crate::network::NodeParams;

/// Default truncation budgets `eps'` and `eps''`.
pub const DEFAULT_EPS: f64 = 2e-5;

/// Mean, variance and dispersion index of `u_k(inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousMoments {
    pub mean: f64,
    pub variance: f64,
    /// `sqrt(V)/|E|`; `None` when the mean vanishes.
    pub dispersion: Option<f64>,
}

impl ContinuousMoments {
    pub fn std(&self) -> f64 {
        libm::sqrt(self.variance)
    }
}

pub fn moments<M: ObservationModel + ?Sized>(model: &M, node: &NodeParams, h: Hypothesis) -> Result<ContinuousMoments> {
    let eta = node.eta;
    if !(eta < 1.0) {
        return Err(Error::DegenerateMemory(eta));
    }
    let scale = node.a * node.mu;
    let e = model.mean(h);
    let v = model.variance(h);
    let dispersion = if e != 0.0 {
        Some(libm::sqrt(v) / e.abs() * libm::sqrt((1.0 - eta) / (1.0 + eta)))
    } else {
        None
    };
    Ok(ContinuousMoments {
        mean: scale * e / (1.0 - eta),
        variance: scale * scale * v / (1.0 - eta * eta),
        dispersion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMode {
    Truncated,
    Completed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSettings {
    pub eps_prime: f64,
    pub eps_dprime: f64,
    pub mode: SeriesMode,
    /// Hard cap on the number of retained terms.
    pub max_terms: usize,
}

impl Default for SeriesSettings {
    fn default() -> Self {
        Self {
            eps_prime: DEFAULT_EPS,
            eps_dprime: DEFAULT_EPS,
            mode: SeriesMode::Completed,
            max_terms: 2_000_000,
        }
    }
}

impl SeriesSettings {
    pub fn with_eps(eps_prime: f64) -> Self {
        Self {
            eps_prime,
            ..Self::default()
        }
    }

    pub fn truncated() -> Self {
        Self {
            mode: SeriesMode::Truncated,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_prime > 0.0 && self.eps_prime < 1.0) || !(self.eps_dprime > 0.0 && self.eps_dprime < 1.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "series budgets must lie in (0, 1): eps' = {}, eps'' = {}",
                self.eps_prime,
                self.eps_dprime
            )));
        }
        Ok(())
    }
}

/// Outcome of one pointwise series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEvaluation {
    /// Raw sum clamped to `[0, 1]`.
    pub value: f64,
    pub raw: f64,
    pub delta: f64,
    /// `None` when the radius is infinite.
    pub n_bar: Option<usize>,
    pub m_bar: usize,
    pub terms: usize,
    /// Sum of the absolute values of the last ten retained terms.
    pub tail_sum: f64,
    /// `tail_sum < eps' / 10`.
    pub tail_ok: bool,
}

/// `m_bar = ceil(ln eps'' / ln eta)`, at least one.
pub fn m_bar(eta: f64, eps_dprime: f64) -> usize {
    if eta <= 0.0 {
        return 1;
    }
    let m = libm::ceil(libm::log(eps_dprime) / libm::log(eta));
    if m < 1.0 {
        1
    } else {
        m as usize
    }
}

/// `n_bar = floor(tau / (eta delta) - 1)`; `None` for an infinite radius.
pub fn n_bar(tau: f64, eta: f64, delta: f64) -> Option<usize> {
    if !tau.is_finite() || eta <= 0.0 {
        return None;
    }
    let n = libm::floor(tau / (eta * delta) - 1.0);
    Some(if n < 0.0 { 0 } else { n as usize })
}

/// `phi_{n,h} / (1 - eta^n)` for `n = 1..=m_bar`.
pub fn phi_w_coefficients<M: ObservationModel + ?Sized>(model: &M, node: &NodeParams, h: Hypothesis, m_bar: usize) -> Vec<Complex64> {
    (1..=m_bar)
        .map(|n| model.phi_coeff(n, h) / (1.0 - libm::pow(node.eta, n as f64)))
        .collect()
}

/// Grid step satisfying both error conditions at evaluation point `u`.
///
/// Models bounded below use the support bound for the left tail and
/// Chebyshev's inequality for the right tail; unbounded models use
/// Chebyshev on both sides.
pub fn select_delta<M: ObservationModel + ?Sized>(model: &M, node: &NodeParams, h: Hypothesis, u: f64, eps_prime: f64) -> Result<f64> {
    if !(eps_prime > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("eps' = {eps_prime} must be positive")));
    }
    let mom = moments(model, node, h)?;
    let scale = node.a * node.mu;
    let spread = libm::sqrt(2.0 * mom.variance / eps_prime);
    let right_den = spread + mom.mean - u;
    if !(right_den > 0.0) {
        return Err(Error::DeltaSelection { u });
    }
    let right = 2.0 * PI * scale / right_den;
    match model.support_lower_bound() {
        Some(lb) => {
            let w_inf = lb / (1.0 - node.eta);
            let w = u / scale;
            if w > w_inf {
                Ok(right.min(2.0 * PI / (w - w_inf)))
            } else {
                Ok(right)
            }
        }
        None => {
            let left_den = spread + u - mom.mean;
            if !(left_den > 0.0) {
                return Err(Error::DeltaSelection { u });
            }
            Ok(right.min(2.0 * PI * scale / left_den))
        }
    }
}

/// Everything needed to evaluate the series for one `(model, node, h)`.
#[derive(Debug, Clone)]
pub struct ContinuousDist<'a, M: ObservationModel + ?Sized> {
    model: &'a M,
    node: NodeParams,
    h: Hypothesis,
    settings: SeriesSettings,
    moments: ContinuousMoments,
    m_bar: usize,
    coeffs: Vec<Complex64>,
}

impl<'a, M: ObservationModel + ?Sized> ContinuousDist<'a, M> {
    pub fn new(model: &'a M, node: &NodeParams, h: Hypothesis, settings: SeriesSettings) -> Result<Self> {
        settings.validate()?;
        let moments = moments(model, node, h)?;
        let m_bar = m_bar(node.eta, settings.eps_dprime);
        let coeffs = phi_w_coefficients(model, node, h, m_bar);
        Ok(Self {
            model,
            node: node.clone(),
            h,
            settings,
            moments,
            m_bar,
            coeffs,
        })
    }

    pub fn moments(&self) -> ContinuousMoments {
        self.moments
    }

    pub fn m_bar(&self) -> usize {
        self.m_bar
    }

    pub fn settings(&self) -> &SeriesSettings {
        &self.settings
    }

    /// Left end of the support of `u`, if any.
    pub fn support_infimum(&self) -> Option<f64> {
        self.model
            .support_lower_bound()
            .map(|lb| self.node.a * self.node.mu * lb / (1.0 - self.node.eta))
    }

    pub fn select_delta(&self, u: f64) -> Result<f64> {
        select_delta(self.model, &self.node, self.h, u, self.settings.eps_prime)
    }

    pub fn n_bar(&self, delta: f64) -> Option<usize> {
        n_bar(self.model.radius(self.h), self.node.eta, delta)
    }

    /// `Phi_w(t)` for real `t >= 0` in the configured mode.
    pub fn log_cf_w(&self, t: f64) -> Complex64 {
        let eta = self.node.eta;
        let tau = self.model.radius(self.h);
        let peel = match self.settings.mode {
            SeriesMode::Truncated => 1,
            SeriesMode::Completed => {
                if tau.is_finite() && t.abs() > tau && eta > 0.0 {
                    1 + libm::ceil(libm::log(t.abs() / tau) / libm::log(1.0 / eta)) as usize
                } else {
                    1
                }
            }
        };
        let mut acc = Complex64::new(0.0, 0.0);
        let mut arg = t;
        for _ in 0..peel {
            acc += self.model.log_cf(Complex64::new(arg, 0.0), self.h);
            arg *= eta;
        }
        // Horner on sum_m c_m s^m with s = eta^peel t
        let mut poly = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            poly = (poly + c) * arg;
        }
        acc + poly
    }

    /// Pointwise evaluation with its own grid step.
    pub fn cdf_detailed(&self, u: f64) -> Result<SeriesEvaluation> {
        let delta = self.select_delta(u)?;
        let plan = self.plan(delta)?;
        Ok(plan.evaluate(u))
    }

    pub fn cdf(&self, u: f64) -> Result<f64> {
        self.cdf_detailed(u).map(|e| e.value)
    }

    /// Precomputes the series terms for grid step `delta`.
    pub fn plan(&self, delta: f64) -> Result<SeriesPlan> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!("delta = {delta} must be positive")));
        }
        let n_bar = self.n_bar(delta);
        let limit = match (self.settings.mode, n_bar) {
            (SeriesMode::Truncated, Some(n)) => n + 1,
            _ => self.settings.max_terms,
        };
        let stop = self.settings.eps_prime / 100.0;
        let mut magnitudes = Vec::new();
        let mut phases = Vec::new();
        let mut converged = false;
        for n in 0..limit {
            let t = (2 * n + 1) as f64 * delta / 2.0;
            let phi = self.log_cf_w(t);
            if !phi.re.is_finite() || !phi.im.is_finite() {
                return Err(Error::NonFinite { n });
            }
            let modulus = libm::exp(phi.re);
            magnitudes.push(modulus / (2 * n + 1) as f64);
            phases.push(phi.im);
            if modulus < stop {
                converged = true;
                break;
            }
        }
        if !converged && !(self.settings.mode == SeriesMode::Truncated && n_bar.is_some()) {
            return Err(Error::SeriesNotConverged(limit));
        }
        Ok(SeriesPlan {
            delta,
            w_scale: 1.0 / (self.node.a * self.node.mu),
            n_bar,
            m_bar: self.m_bar,
            eps_prime: self.settings.eps_prime,
            magnitudes,
            phases,
        })
    }

    /// Default tabulation grid: `[max(u_inf, mean - 10 std), mean + 12 std]`.
    pub fn table_grid(&self, points: usize) -> Vec<f64> {
        let m = self.moments.mean;
        let s = self.moments.std();
        let mut lo = m - 10.0 * s;
        if let Some(inf) = self.support_infimum() {
            lo = lo.max(inf);
        }
        let hi = m + 12.0 * s;
        let points = points.max(2);
        (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
    }

    /// Plan valid at every point of `grid`: `delta` is re-derived at each
    /// point and the smallest one is used for all of them.
    pub fn plan_for_grid(&self, grid: &[f64]) -> Result<SeriesPlan> {
        let mut delta = f64::INFINITY;
        for &u in grid {
            delta = delta.min(self.select_delta(u)?);
        }
        self.plan(delta)
    }

    /// Sequential tabulation on the default grid.
    pub fn tabulate(&self, points: usize) -> Result<ContinuousCdfTable> {
        let grid = self.table_grid(points);
        let plan = self.plan_for_grid(&grid)?;
        let raw: Vec<f64> = grid.iter().map(|&u| plan.evaluate(u).raw).collect();
        ContinuousCdfTable::from_raw(grid, raw, self.settings.eps_prime)
    }
}

/// Precomputed `|cf_w(t_n)| / (2n+1)` and `arg cf_w(t_n)` for a fixed step.
#[derive(Debug, Clone)]
pub struct SeriesPlan {
    delta: f64,
    w_scale: f64,
    n_bar: Option<usize>,
    m_bar: usize,
    eps_prime: f64,
    magnitudes: Vec<f64>,
    phases: Vec<f64>,
}

impl SeriesPlan {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn terms(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn evaluate(&self, u: f64) -> SeriesEvaluation {
        let w = u * self.w_scale;
        let mut sum = 0.0;
        let mut tail = 0.0;
        let len = self.magnitudes.len();
        for (n, (&mag, &ph)) in self.magnitudes.iter().zip(&self.phases).enumerate() {
            let t = (2 * n + 1) as f64 * self.delta / 2.0;
            let term = mag * libm::sin(ph - w * t);
            sum += term;
            if n + 10 >= len {
                tail += term.abs();
            }
        }
        let raw = 0.5 - 2.0 / PI * sum;
        SeriesEvaluation {
            value: raw.clamp(0.0, 1.0),
            raw,
            delta: self.delta,
            n_bar: self.n_bar,
            m_bar: self.m_bar,
            terms: len,
            tail_sum: tail,
            tail_ok: tail < self.eps_prime / 10.0,
        }
    }
}

/// Pointwise series CDF of `u_k(inf)` with default settings and budget `eps'`.
pub fn cdf_u<M: ObservationModel + ?Sized>(u: f64, model: &M, node: &NodeParams, h: Hypothesis, eps_prime: f64) -> Result<f64> {
    ContinuousDist::new(model, node, h, SeriesSettings::with_eps(eps_prime))?.cdf(u)
}

/// Exact CDF for the Gaussian model.
pub fn cdf_u_gaussian_closed<M: ObservationModel + ?Sized>(u: f64, model: &M, node: &NodeParams, h: Hypothesis) -> Result<f64> {
    if !model.is_gaussian() {
        return Err(Error::NotGaussian);
    }
    let m = moments(model, node, h)?;
    Ok(normal_cdf_with(u, m.mean, m.std()))
}

/// Monotone tabulated CDF with linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousCdfTable {
    grid: Vec<f64>,
    values: Vec<f64>,
    /// Raw points that dropped more than `5 eps'` below the running maximum
    /// or left `[-5 eps', 1 + 5 eps']`.
    pub violations: usize,
    /// Largest such excursion.
    pub max_violation: f64,
}

impl ContinuousCdfTable {
    /// Clamps, enforces monotonicity by a running maximum and records
    /// excursions larger than `5 eps'`.
    pub fn from_raw(grid: Vec<f64>, raw: Vec<f64>, eps_prime: f64) -> Result<Self> {
        if grid.len() != raw.len() || grid.len() < 2 {
            return Err(Error::InvalidArgument("table needs matching grid and values".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("table grid must be strictly increasing".into()));
        }
        let slack = 5.0 * eps_prime;
        let mut violations = 0;
        let mut max_violation: f64 = 0.0;
        let mut values = Vec::with_capacity(raw.len());
        let mut running: f64 = 0.0;
        for &r in &raw {
            let excursion = (running - r).max(r - 1.0).max(-r);
            if excursion > slack {
                violations += 1;
            }
            max_violation = max_violation.max(excursion);
            running = running.max(r.clamp(0.0, 1.0));
            values.push(running);
        }
        Ok(Self {
            grid,
            values,
            violations,
            max_violation,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn range(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    /// Left of the grid the CDF is 0, right of it 1.
    pub fn eval(&self, u: f64) -> f64 {
        let (lo, hi) = self.range();
        if u < lo {
            return 0.0;
        }
        if u >= hi {
            return 1.0;
        }
        let i = self.grid.partition_point(|&g| g <= u) - 1;
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        y0 + (y1 - y0) * (u - x0) / (x1 - x0)
    }
}

/// Evaluable CDF of the continuous component.
#[derive(Debug, Clone, PartialEq)]
pub enum ContinuousCdf {
    Gaussian { mean: f64, std: f64 },
    Table(ContinuousCdfTable),
}

impl ContinuousCdf {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            ContinuousCdf::Gaussian { mean, std } => normal_cdf_with(u, *mean, *std),
            ContinuousCdf::Table(t) => t.eval(u),
        }
    }

    /// Interval outside which the CDF is 0 or 1 up to the series budget.
    pub fn effective_range(&self) -> (f64, f64) {
        match self {
            ContinuousCdf::Gaussian { mean, std } => (mean - 10.0 * std, mean + 12.0 * std),
            ContinuousCdf::Table(t) => t.range(),
        }
    }
}

/// Builds the continuous CDF: closed form for Gaussian models, otherwise a
/// table filled by `evaluate_grid`, which maps grid points to raw series
/// values and may run in parallel.
pub fn build_continuous_cdf_with<M, F>(
    model: &M,
    node: &NodeParams,
    h: Hypothesis,
    settings: SeriesSettings,
    points: usize,
    evaluate_grid: F,
) -> Result<ContinuousCdf>
where
    M: ObservationModel + ?Sized,
    F: FnOnce(&SeriesPlan, &[f64]) -> Vec<f64>,
{
    if model.is_gaussian() {
        let m = moments(model, node, h)?;
        return Ok(ContinuousCdf::Gaussian {
            mean: m.mean,
            std: m.std(),
        });
    }
    let dist = ContinuousDist::new(model, node, h, settings)?;
    let grid = dist.table_grid(points);
    let plan = dist.plan_for_grid(&grid)?;
    let raw = evaluate_grid(&plan, &grid);
    Ok(ContinuousCdf::Table(ContinuousCdfTable::from_raw(grid, raw, settings.eps_prime)?))
}

/// Sequential [`build_continuous_cdf_with`].
pub fn build_continuous_cdf<M: ObservationModel + ?Sized>(
    model: &M,
    node: &NodeParams,
    h: Hypothesis,
    settings: SeriesSettings,
    points: usize,
) -> Result<ContinuousCdf> {
    build_continuous_cdf_with(model, node, h, settings, points, |plan, grid| {
        grid.iter().map(|&u| plan.evaluate(u).raw).collect()
    })
}

/// Default number of tabulation points.
pub const DEFAULT_TABLE_POINTS: usize = 401;
