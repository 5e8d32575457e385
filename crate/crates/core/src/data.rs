//! Price ingestion, the percent log-return transform, and a synthetic
//! GARCH(1,1) generator.

use std::io::{Read, Write};
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{check_constraints, ParamVector, ReturnSeries};
use crate::rng::{SeedSequence, Stream};

/// Pre-samples discarded by [`generate_synthetic`] before recording.
pub const SYNTHETIC_BURN_IN: usize = 1000;

/// Dated positive prices in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    labels: Vec<String>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(observations: Vec<(String, f64)>) -> Result<Self> {
        if observations.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: observations.len(),
            });
        }
        if let Some((label, p)) = observations
            .iter()
            .find(|(_, p)| !(p.is_finite() && *p > 0.0))
        {
            return Err(Error::DataValidation(format!(
                "price at {label:?} must be positive and finite, got {p}"
            )));
        }
        let (labels, prices) = observations.into_iter().unzip();
        Ok(PriceSeries { labels, prices })
    }

    /// Unlabeled convenience constructor; labels become row numbers.
    pub fn from_prices(prices: &[f64]) -> Result<Self> {
        Self::new(
            prices
                .iter()
                .enumerate()
                .map(|(i, p)| ((i + 1).to_string(), *p))
                .collect(),
        )
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// [`transform_returns`] wrapped as a validated [`ReturnSeries`]
    /// (needs at least three prices).
    pub fn to_returns(&self) -> Result<ReturnSeries> {
        ReturnSeries::new(transform_returns(self))
    }
}

/// `r_i = 100 * (ln(p_i / p_{i-1}) - s)` where `s` is the mean log-return.
///
/// The output has one fewer element than the input and mean zero.
pub fn transform_returns(p: &PriceSeries) -> Vec<f64> {
    let log_returns: Vec<f64> = p.prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let mean = log_returns.iter().sum::<f64>() / log_returns.len() as f64;
    log_returns.iter().map(|r| 100.0 * (r - mean)).collect()
}

/// Reads `label,price` rows. A first row whose price field does not parse
/// as a number is treated as a header; any later unparsable row is an error.
pub fn read_prices<R: Read>(reader: R) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut observations = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.len() != 2 {
            return Err(Error::DataValidation(format!(
                "line {line}: expected 2 fields (label,price), found {}",
                record.len()
            )));
        }
        match record[1].parse::<f64>() {
            Ok(price) => observations.push((record[0].to_string(), price)),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::DataValidation(format!(
                    "line {line}: cannot parse price {:?}",
                    &record[1]
                )))
            }
        }
    }
    PriceSeries::new(observations)
}

pub fn read_prices_path(path: &Path) -> Result<PriceSeries> {
    read_prices(std::fs::File::open(path)?)
}

/// Writes a single `return` column.
pub fn write_returns<W: Write>(writer: W, returns: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["return"])?;
    for r in returns {
        w.write_record([r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Parameters for a simulated GARCH(1,1) return series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub true_theta: ParamVector,
    pub n: usize,
    pub seed: u64,
    pub sigma1_sq: f64,
}

impl SyntheticSpec {
    /// Starts the recursion at the unconditional variance.
    pub fn stationary(true_theta: ParamVector, n: usize, seed: u64) -> Self {
        SyntheticSpec {
            true_theta,
            n,
            seed,
            sigma1_sq: true_theta.unconditional_variance(),
        }
    }
}

/// Simulates `y_t = sigma_t * eps_t` with the GARCH(1,1) variance
/// recursion, discarding [`SYNTHETIC_BURN_IN`] leading draws.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<ReturnSeries> {
    if !check_constraints(&spec.true_theta)? {
        return Err(Error::InvalidParameter(format!("{:?}", spec.true_theta)));
    }
    if !(spec.sigma1_sq.is_finite() && spec.sigma1_sq > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "initial variance must be positive, got {}",
            spec.sigma1_sq
        )));
    }
    let ParamVector { alpha, beta, omega } = spec.true_theta;
    let mut rng = SeedSequence::new(spec.seed).stream(Stream::Synthetic);
    let mut s2 = spec.sigma1_sq;
    let mut out = Vec::with_capacity(spec.n);
    for t in 0..SYNTHETIC_BURN_IN + spec.n {
        let eps: f64 = StandardNormal.sample(&mut rng);
        let y = s2.sqrt() * eps;
        if t >= SYNTHETIC_BURN_IN {
            out.push(y);
        }
        s2 = omega + alpha * y * y + beta * s2;
    }
    ReturnSeries::new(out)
}
