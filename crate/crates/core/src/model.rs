//! Observation models: the marginal statistic `x`, its one-bit quantizer and
//! the log-characteristic-function data needed by the series inversion.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::RngCore;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::math::normal_cdf;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// State of nature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub const BOTH: [Hypothesis; 2] = [Hypothesis::H0, Hypothesis::H1];

    pub fn index(self) -> usize {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }
}

/// One-bit message: the quantized statistic and its normalized sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizedMessage {
    /// `E_1 x` when `bit = +1`, `E_0 x` otherwise.
    pub value: f64,
    pub bit: i8,
}

/// Distribution of the marginal statistic under both hypotheses.
pub trait ObservationModel {
    /// Draws one statistic under `h`.
    fn sample(&self, h: Hypothesis, rng: &mut dyn RngCore) -> f64;
    fn mean(&self, h: Hypothesis) -> f64;
    fn variance(&self, h: Hypothesis) -> f64;
    fn local_threshold(&self) -> f64;
    /// `P_1(x >= gamma_loc)`.
    fn p_d(&self) -> f64;
    /// `P_0(x >= gamma_loc)`.
    fn p_f(&self) -> f64;
    /// Power-series coefficient `phi_{n,h}` of the log-characteristic function.
    fn phi_coeff(&self, n: usize, h: Hypothesis) -> Complex64;
    /// Convergence radius of the coefficient series; may be infinite.
    fn radius(&self, h: Hypothesis) -> f64;
    /// Closed-form log-characteristic function at a (possibly complex) argument.
    fn log_cf(&self, t: Complex64, h: Hypothesis) -> Complex64;
    /// Lower end of the support, if bounded below.
    fn support_lower_bound(&self) -> Option<f64>;
    fn is_gaussian(&self) -> bool {
        false
    }
    fn name(&self) -> &'static str;

    /// Probability that the quantizer outputs `+1` under `h`.
    fn p_plus(&self, h: Hypothesis) -> f64 {
        match h {
            Hypothesis::H0 => self.p_f(),
            Hypothesis::H1 => self.p_d(),
        }
    }

    fn quantize(&self, x: f64) -> QuantizedMessage {
        if x >= self.local_threshold() {
            QuantizedMessage {
                value: self.mean(Hypothesis::H1),
                bit: 1,
            }
        } else {
            QuantizedMessage {
                value: self.mean(Hypothesis::H0),
                bit: -1,
            }
        }
    }

    /// `E_h x~`: mean of the one-bit message.
    fn message_mean(&self, h: Hypothesis) -> f64 {
        let p = self.p_plus(h);
        p * self.mean(Hypothesis::H1) + (1.0 - p) * self.mean(Hypothesis::H0)
    }

    /// `V_h x~`: variance of the one-bit message.
    fn message_variance(&self, h: Hypothesis) -> f64 {
        let p = self.p_plus(h);
        let d = self.mean(Hypothesis::H1) - self.mean(Hypothesis::H0);
        p * (1.0 - p) * d * d
    }
}

/// Shift-in-mean Gaussian log-likelihood ratio: `x ~ N(-rho, 2 rho)` under
/// `H0` and `N(rho, 2 rho)` under `H1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModel {
    rho: f64,
    gamma_loc: f64,
}

impl GaussianModel {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidModel(format!("rho = {rho} must be positive")));
        }
        Ok(Self { rho, gamma_loc: 0.0 })
    }

    /// Same model quantized at a non-default local threshold.
    pub fn with_threshold(rho: f64, gamma_loc: f64) -> Result<Self> {
        let mut m = Self::new(rho)?;
        m.gamma_loc = gamma_loc;
        Ok(m)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn std(&self) -> f64 {
        libm::sqrt(2.0 * self.rho)
    }
}

impl ObservationModel for GaussianModel {
    fn sample(&self, h: Hypothesis, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean(h) + self.std() * z
    }

    fn mean(&self, h: Hypothesis) -> f64 {
        match h {
            Hypothesis::H0 => -self.rho,
            Hypothesis::H1 => self.rho,
        }
    }

    fn variance(&self, _h: Hypothesis) -> f64 {
        2.0 * self.rho
    }

    fn local_threshold(&self) -> f64 {
        self.gamma_loc
    }

    fn p_d(&self) -> f64 {
        1.0 - normal_cdf((self.gamma_loc - self.rho) / self.std())
    }

    fn p_f(&self) -> f64 {
        1.0 - normal_cdf((self.gamma_loc + self.rho) / self.std())
    }

    fn phi_coeff(&self, n: usize, h: Hypothesis) -> Complex64 {
        match n {
            1 => J * self.mean(h),
            2 => Complex64::new(-self.variance(h) / 2.0, 0.0),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    fn radius(&self, _h: Hypothesis) -> f64 {
        f64::INFINITY
    }

    fn log_cf(&self, t: Complex64, h: Hypothesis) -> Complex64 {
        J * t * self.mean(h) - t * t * (self.variance(h) / 2.0)
    }

    fn support_lower_bound(&self) -> Option<f64> {
        None
    }

    fn is_gaussian(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "gaussian"
    }
}

/// Normalized log-likelihood ratio for an exponential rate test with rate
/// ratio `lambda_e = lambda_0 / lambda_1 > 1`.
///
/// Under `H0` the statistic is `(1 - 1/lambda_e) Y - ln lambda_e`, under `H1`
/// it is `(lambda_e - 1) Y - ln lambda_e`, with `Y ~ Exp(1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialModel {
    lambda_e: f64,
}

impl ExponentialModel {
    pub fn new(lambda_e: f64) -> Result<Self> {
        if !(lambda_e > 1.0 && lambda_e.is_finite()) {
            return Err(Error::InvalidModel(format!("lambda_e = {lambda_e} must exceed 1")));
        }
        Ok(Self { lambda_e })
    }

    pub fn lambda_e(&self) -> f64 {
        self.lambda_e
    }

    fn ln_lambda(&self) -> f64 {
        libm::log(self.lambda_e)
    }

    /// Scale of the exponential variable under `h`.
    fn scale(&self, h: Hypothesis) -> f64 {
        match h {
            Hypothesis::H0 => 1.0 - 1.0 / self.lambda_e,
            Hypothesis::H1 => self.lambda_e - 1.0,
        }
    }
}

impl ObservationModel for ExponentialModel {
    fn sample(&self, h: Hypothesis, rng: &mut dyn RngCore) -> f64 {
        let y: f64 = Exp1.sample(rng);
        self.scale(h) * y - self.ln_lambda()
    }

    fn mean(&self, h: Hypothesis) -> f64 {
        self.scale(h) - self.ln_lambda()
    }

    fn variance(&self, h: Hypothesis) -> f64 {
        let s = self.scale(h);
        s * s
    }

    fn local_threshold(&self) -> f64 {
        0.0
    }

    fn p_d(&self) -> f64 {
        libm::pow(self.lambda_e, -1.0 / (self.lambda_e - 1.0))
    }

    fn p_f(&self) -> f64 {
        libm::pow(self.lambda_e, -self.lambda_e / (self.lambda_e - 1.0))
    }

    fn phi_coeff(&self, n: usize, h: Hypothesis) -> Complex64 {
        match n {
            0 => Complex64::new(0.0, 0.0),
            1 => J * self.mean(h),
            _ => (J * self.scale(h)).powi(n as i32) / n as f64,
        }
    }

    fn radius(&self, h: Hypothesis) -> f64 {
        1.0 / self.scale(h)
    }

    fn log_cf(&self, t: Complex64, h: Hypothesis) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        -J * t * self.ln_lambda() - (one - J * t * self.scale(h)).ln()
    }

    fn support_lower_bound(&self) -> Option<f64> {
        Some(-self.ln_lambda())
    }

    fn name(&self) -> &'static str {
        "exponential"
    }
}

/// Closed set of shipped models with static dispatch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Gaussian(GaussianModel),
    Exponential(ExponentialModel),
}

impl Model {
    pub fn gaussian(rho: f64) -> Result<Self> {
        GaussianModel::new(rho).map(Model::Gaussian)
    }

    pub fn exponential(lambda_e: f64) -> Result<Self> {
        ExponentialModel::new(lambda_e).map(Model::Exponential)
    }

    fn inner(&self) -> &dyn ObservationModel {
        match self {
            Model::Gaussian(m) => m,
            Model::Exponential(m) => m,
        }
    }
}

impl ObservationModel for Model {
    fn sample(&self, h: Hypothesis, rng: &mut dyn RngCore) -> f64 {
        match self {
            Model::Gaussian(m) => m.sample(h, rng),
            Model::Exponential(m) => m.sample(h, rng),
        }
    }
    fn mean(&self, h: Hypothesis) -> f64 {
        self.inner().mean(h)
    }
    fn variance(&self, h: Hypothesis) -> f64 {
        self.inner().variance(h)
    }
    fn local_threshold(&self) -> f64 {
        self.inner().local_threshold()
    }
    fn p_d(&self) -> f64 {
        self.inner().p_d()
    }
    fn p_f(&self) -> f64 {
        self.inner().p_f()
    }
    fn phi_coeff(&self, n: usize, h: Hypothesis) -> Complex64 {
        self.inner().phi_coeff(n, h)
    }
    fn radius(&self, h: Hypothesis) -> f64 {
        self.inner().radius(h)
    }
    fn log_cf(&self, t: Complex64, h: Hypothesis) -> Complex64 {
        self.inner().log_cf(t, h)
    }
    fn support_lower_bound(&self) -> Option<f64> {
        self.inner().support_lower_bound()
    }
    fn is_gaussian(&self) -> bool {
        self.inner().is_gaussian()
    }
    fn name(&self) -> &'static str {
        self.inner().name()
    }
}

/// Relative residuals between the shipped coefficients `phi_{1..=n_max}` and
/// Taylor coefficients of `log_cf` extracted by a discrete Cauchy integral.
/// Coefficients that vanish are compared in absolute terms.
pub fn cumulant_check<M: ObservationModel + ?Sized>(model: &M, h: Hypothesis, n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 || n_max > 6 {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} must lie in 1..=6")));
    }
    let tau = model.radius(h);
    let r = if tau.is_finite() { (tau / 2.0).min(0.5) } else { 0.5 };
    const POINTS: usize = 128;
    let samples: Vec<Complex64> = (0..POINTS)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / POINTS as f64;
            model.log_cf(Complex64::from_polar(r, theta), h)
        })
        .collect();
    let residuals = (1..=n_max)
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, v) in samples.iter().enumerate() {
                let theta = 2.0 * PI * (i * n) as f64 / POINTS as f64;
                acc += v * Complex64::from_polar(1.0, -theta);
            }
            let numeric = acc / (POINTS as f64 * libm::pow(r, n as f64));
            let shipped = model.phi_coeff(n, h);
            let scale = shipped.norm();
            let diff = (numeric - shipped).norm();
            if scale > 0.0 {
                diff / scale
            } else {
                diff
            }
        })
        .collect();
    Ok(residuals)
}
