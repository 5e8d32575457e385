//! GARCH(1,1) parameters, the conditional-variance recursion and the
//! flat-prior posterior.
//!
//! ```text
//! y_t     = sigma_t * eps_t,          eps_t ~ N(0, 1)
//! sigma_t² = omega + alpha * y_{t-1}² + beta * sigma_{t-1}²
//! ```
//!
//! The prior is constant on the region `alpha, beta, omega > 0`,
//! `alpha + beta < 1` and zero outside it, so the log-posterior equals the
//! log-likelihood up to an additive constant inside the region.

use std::f64::consts::PI;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of free parameters in GARCH(1,1).
pub const N_PARAMS: usize = 3;

/// Parameter labels in storage order.
pub const PARAM_NAMES: [&str; N_PARAMS] = ["alpha", "beta", "omega"];

/// GARCH(1,1) parameter triple, always ordered `(alpha, beta, omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
}

impl ParamVector {
    pub const fn new(alpha: f64, beta: f64, omega: f64) -> Self {
        ParamVector { alpha, beta, omega }
    }

    pub fn to_array(self) -> [f64; N_PARAMS] {
        [self.alpha, self.beta, self.omega]
    }

    /// Builds a parameter vector from the first three entries of `x`.
    ///
    /// Panics if `x` is shorter than three.
    pub fn from_slice(x: &[f64]) -> Self {
        ParamVector::new(x[0], x[1], x[2])
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.omega.is_finite()
    }

    /// Unconditional variance `omega / (1 - alpha - beta)`.
    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.alpha - self.beta)
    }
}

impl From<[f64; N_PARAMS]> for ParamVector {
    fn from(a: [f64; N_PARAMS]) -> Self {
        ParamVector::new(a[0], a[1], a[2])
    }
}

/// Positivity and strict stationarity check.
///
/// Errors only when a component is NaN or infinite; an out-of-region but
/// finite vector yields `Ok(false)`.
pub fn check_constraints(theta: &ParamVector) -> Result<bool> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("GARCH parameter"));
    }
    Ok(
        theta.alpha > 0.0
            && theta.beta > 0.0
            && theta.omega > 0.0
            && theta.alpha + theta.beta < 1.0,
    )
}

fn require_valid(theta: &ParamVector, sigma1_sq: f64) -> Result<()> {
    if !check_constraints(theta)? {
        return Err(Error::InvalidParameter(format!(
            "alpha={}, beta={}, omega={}",
            theta.alpha, theta.beta, theta.omega
        )));
    }
    if !(sigma1_sq.is_finite() && sigma1_sq > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "initial variance must be positive, got {sigma1_sq}"
        )));
    }
    Ok(())
}

/// Demeaned percent returns `y_1..y_n`, `n >= 2`, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries(Vec<f64>);

impl ReturnSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::DataValidation(format!(
                "return {} is not finite ({})",
                i + 1,
                values[i]
            )));
        }
        Ok(ReturnSeries(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Unbiased sample variance (divides by `n - 1`).
    pub fn sample_variance(&self) -> f64 {
        let n = self.0.len() as f64;
        let mean = self.0.iter().sum::<f64>() / n;
        self.0.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }
}

impl Deref for ReturnSeries {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Conditional variances `sigma_1²..sigma_n²`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilitySeries(Vec<f64>);

impl VolatilitySeries {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for VolatilitySeries {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Runs the variance recursion forward from `sigma1_sq`.
pub fn compute_volatility(
    theta: &ParamVector,
    y: &[f64],
    sigma1_sq: f64,
) -> Result<VolatilitySeries> {
    require_valid(theta, sigma1_sq)?;
    let mut out = Vec::with_capacity(y.len());
    let mut s2 = sigma1_sq;
    for t in 0..y.len() {
        if t > 0 {
            s2 = theta.omega + theta.alpha * y[t - 1] * y[t - 1] + theta.beta * s2;
        }
        out.push(s2);
    }
    Ok(VolatilitySeries(out))
}

/// Gaussian log-likelihood `sum_t [-½ ln(2π σ_t²) - y_t² / (2 σ_t²)]`.
///
/// Accepts any non-empty slice; the `n >= 2` rule belongs to
/// [`ReturnSeries`], not to the density itself.
pub fn log_likelihood(theta: &ParamVector, y: &[f64], sigma1_sq: f64) -> Result<f64> {
    require_valid(theta, sigma1_sq)?;
    if y.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut s2 = sigma1_sq;
    let mut sum_log_var = 0.0;
    let mut sum_sq_ratio = 0.0;
    let mut prev_sq = 0.0;
    for (t, yt) in y.iter().enumerate() {
        if t > 0 {
            s2 = theta.omega + theta.alpha * prev_sq + theta.beta * s2;
        }
        let sq = yt * yt;
        sum_log_var += s2.ln();
        sum_sq_ratio += sq / s2;
        prev_sq = sq;
    }
    let n = y.len() as f64;
    let ll = -0.5 * (n * (2.0 * PI).ln() + sum_log_var + sum_sq_ratio);
    if ll.is_finite() {
        Ok(ll)
    } else {
        Err(Error::NumericOverflow("log-likelihood"))
    }
}

/// A log density value, or the marker for "outside the support".
///
/// Kept distinct from `f64::NEG_INFINITY` so accept ratios never touch
/// `inf - inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogDensity {
    Finite(f64),
    Excluded,
}

impl LogDensity {
    pub fn is_excluded(self) -> bool {
        matches!(self, LogDensity::Excluded)
    }

    pub fn value(self) -> Option<f64> {
        match self {
            LogDensity::Finite(v) => Some(v),
            LogDensity::Excluded => None,
        }
    }

    /// `Excluded` maps to negative infinity; for reporting only.
    pub fn to_f64(self) -> f64 {
        self.value().unwrap_or(f64::NEG_INFINITY)
    }
}

/// Flat-prior log-posterior truncated to the constraint region.
pub fn log_posterior(theta: &ParamVector, y: &[f64], sigma1_sq: f64) -> Result<LogDensity> {
    if !check_constraints(theta)? {
        return Ok(LogDensity::Excluded);
    }
    log_likelihood(theta, y, sigma1_sq).map(LogDensity::Finite)
}

/// How the recursion's starting variance is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma1Policy {
    SampleVariance,
    Fixed(f64),
}

impl Sigma1Policy {
    pub fn resolve(self, y: &ReturnSeries) -> Result<f64> {
        let v = match self {
            Sigma1Policy::SampleVariance => y.sample_variance(),
            Sigma1Policy::Fixed(v) => v,
        };
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Config(format!(
                "initial variance must be positive, got {v}"
            )))
        }
    }
}

/// Any (unnormalized) log density over real vectors.
pub trait LogTarget {
    fn dim(&self) -> usize;
    fn log_density(&self, x: &[f64]) -> LogDensity;
}

/// The GARCH(1,1) posterior for a fixed return series.
#[derive(Debug, Clone)]
pub struct GarchPosterior {
    returns: ReturnSeries,
    sigma1_sq: f64,
}

impl GarchPosterior {
    pub fn new(returns: ReturnSeries, sigma1: Sigma1Policy) -> Result<Self> {
        let sigma1_sq = sigma1.resolve(&returns)?;
        Ok(GarchPosterior { returns, sigma1_sq })
    }

    pub fn returns(&self) -> &ReturnSeries {
        &self.returns
    }

    pub fn sigma1_sq(&self) -> f64 {
        self.sigma1_sq
    }

    pub fn log_posterior(&self, theta: &ParamVector) -> Result<LogDensity> {
        log_posterior(theta, &self.returns, self.sigma1_sq)
    }
}

impl LogTarget for GarchPosterior {
    fn dim(&self) -> usize {
        N_PARAMS
    }

    fn log_density(&self, x: &[f64]) -> LogDensity {
        // Non-finite candidates and overflow both count as zero posterior mass.
        self.log_posterior(&ParamVector::from_slice(x))
            .unwrap_or(LogDensity::Excluded)
    }
}
