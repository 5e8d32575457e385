//! Multivariate Student's t proposal fitted to accumulated draws.
//!
//! ```text
//! g(x) = Γ((ν+p)/2) / (Γ(ν/2) |Σ|^½ (νπ)^{p/2}) · [1 + (x-M)ᵀ Σ⁻¹ (x-M) / ν]^{-(ν+p)/2}
//! ```
//!
//! The fitted scale matrix satisfies `ν Σ / (ν - 2) = V`, where `V` is the
//! empirical (population) covariance of the draws, so the proposal's
//! covariance matches the sample covariance exactly.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{LowerTriangular, SquareMatrix};
use crate::model::{LogDensity, LogTarget};

/// Shape used when none is given.
pub const DEFAULT_NU: f64 = 10.0;

const JITTER_RELATIVE: f64 = 1e-10;
const JITTER_ESCALATION: f64 = 100.0;
const JITTER_RETRIES: usize = 3;

/// Running mean and co-moment of a stream of vectors (Welford updates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleAccumulator {
    count: u64,
    mean: Vec<f64>,
    comoment: SquareMatrix,
}

impl SampleAccumulator {
    pub fn new(dim: usize) -> Self {
        SampleAccumulator {
            count: 0,
            mean: vec![0.0; dim],
            comoment: SquareMatrix::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim());
        self.count += 1;
        let n = self.count as f64;
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        for (m, d) in self.mean.iter_mut().zip(&delta) {
            *m += d / n;
        }
        for (i, (xi, mi)) in x.iter().zip(&self.mean).enumerate() {
            let after_i = xi - mi;
            for (j, dj) in delta.iter().enumerate().take(i + 1) {
                let c = dj * after_i;
                self.comoment[(i, j)] += c;
                if i != j {
                    self.comoment[(j, i)] += c;
                }
            }
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Population covariance `E[(x - M)(x - M)^T]`; zeros when empty.
    pub fn covariance(&self) -> SquareMatrix {
        if self.count == 0 {
            return SquareMatrix::zeros(self.dim());
        }
        self.comoment.scaled(1.0 / self.count as f64)
    }
}

/// Cholesky with diagonal jitter `δ·I`, `δ = 1e-10 · tr(A) / p`, escalated
/// ×100 for up to three retries. Returns the matrix actually factored.
fn factor_with_jitter(a: &SquareMatrix) -> Result<(SquareMatrix, LowerTriangular)> {
    if let Some(l) = a.cholesky() {
        return Ok((a.clone(), l));
    }
    let mut delta = JITTER_RELATIVE * a.trace() / a.dim() as f64;
    if delta > 0.0 && delta.is_finite() {
        for _ in 0..JITTER_RETRIES {
            let jittered = a.add_diagonal(delta);
            if let Some(l) = jittered.cholesky() {
                return Ok((jittered, l));
            }
            delta *= JITTER_ESCALATION;
        }
    }
    Err(Error::DegenerateSample(
        "scale matrix is not positive definite even after jitter".into(),
    ))
}

/// A fitted multivariate Student's t density. Immutable once built.
#[derive(Debug, Clone)]
pub struct StudentTProposal {
    mean: Vec<f64>,
    sigma: SquareMatrix,
    chol: LowerTriangular,
    nu: f64,
    n_samples: u64,
    log_norm: f64,
    chi2: ChiSquared<f64>,
}

impl StudentTProposal {
    /// Builds a proposal from a location and scale matrix directly.
    pub fn new(mean: Vec<f64>, sigma: SquareMatrix, nu: f64) -> Result<Self> {
        Self::build(mean, sigma, nu, 0)
    }

    fn build(mean: Vec<f64>, sigma: SquareMatrix, nu: f64, n_samples: u64) -> Result<Self> {
        if !(nu.is_finite() && nu > 2.0) {
            return Err(Error::Config(format!("shape nu must exceed 2, got {nu}")));
        }
        let p = mean.len();
        if p == 0 || sigma.dim() != p {
            return Err(Error::Config(format!(
                "mean has length {p} but scale matrix is {0}x{0}",
                sigma.dim()
            )));
        }
        if mean.iter().any(|m| !m.is_finite())
            || !sigma.is_symmetric(1e-12 * sigma.frobenius_norm())
        {
            return Err(Error::DegenerateSample(
                "non-finite mean or asymmetric scale".into(),
            ));
        }
        let (sigma, chol) = factor_with_jitter(&sigma)?;
        let pf = p as f64;
        let log_norm = libm::lgamma((nu + pf) / 2.0)
            - libm::lgamma(nu / 2.0)
            - chol.half_log_det()
            - 0.5 * pf * (nu * std::f64::consts::PI).ln();
        let chi2 = ChiSquared::new(nu).map_err(|e| Error::Config(e.to_string()))?;
        Ok(StudentTProposal {
            mean,
            sigma,
            chol,
            nu,
            n_samples,
            log_norm,
            chi2,
        })
    }

    /// Matches the first two moments of the accumulated draws:
    /// `M = mean`, `Σ = (ν - 2) / ν · V`.
    pub fn fit(acc: &SampleAccumulator, nu: f64) -> Result<Self> {
        let p = acc.dim();
        if acc.count() < p as u64 + 1 {
            return Err(Error::DegenerateSample(format!(
                "need at least {} draws to fit a {p}-dimensional proposal, have {}",
                p + 1,
                acc.count()
            )));
        }
        if !(nu.is_finite() && nu > 2.0) {
            return Err(Error::Config(format!("shape nu must exceed 2, got {nu}")));
        }
        let sigma = acc.covariance().scaled((nu - 2.0) / nu);
        Self::build(acc.mean().to_vec(), sigma, nu, acc.count())
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sigma(&self) -> &SquareMatrix {
        &self.sigma
    }

    pub fn cholesky(&self) -> &LowerTriangular {
        &self.chol
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Number of draws the proposal was fitted from (0 if built directly).
    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    /// Covariance of the distribution, `ν Σ / (ν - 2)`.
    pub fn covariance(&self) -> SquareMatrix {
        self.sigma.scaled(self.nu / (self.nu - 2.0))
    }

    /// `θ = L X + M` with `X = Y sqrt(ν / w)`, `Y ~ N(0, I)`, `w ~ χ²_ν`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let y: Vec<f64> = (0..self.dim())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        let w = self.chi2.sample(rng);
        let k = (self.nu / w).sqrt();
        let x: Vec<f64> = y.iter().map(|v| v * k).collect();
        self.chol
            .mul_vec(&x)
            .iter()
            .zip(&self.mean)
            .map(|(lx, m)| lx + m)
            .collect()
    }

    /// `ln g(θ)`; the quadratic form is evaluated by a triangular solve.
    pub fn log_density(&self, theta: &[f64]) -> f64 {
        let diff: Vec<f64> = theta.iter().zip(&self.mean).map(|(t, m)| t - m).collect();
        let z = self.chol.solve(&diff);
        let q: f64 = z.iter().map(|v| v * v).sum();
        self.log_norm - 0.5 * (self.nu + self.dim() as f64) * (q / self.nu).ln_1p()
    }

    pub fn state(&self) -> ProposalState {
        ProposalState {
            mean: self.mean.clone(),
            sigma: self.sigma.to_rows(),
            nu: self.nu,
            n_samples: self.n_samples,
        }
    }

    pub fn from_state(state: &ProposalState) -> Result<Self> {
        let sigma = SquareMatrix::from_rows(&state.sigma)
            .ok_or_else(|| Error::Checkpoint("proposal sigma is not square".into()))?;
        Self::build(state.mean.clone(), sigma, state.nu, state.n_samples)
    }
}

impl PartialEq for StudentTProposal {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean
            && self.sigma == other.sigma
            && self.nu == other.nu
            && self.n_samples == other.n_samples
    }
}

impl LogTarget for StudentTProposal {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> LogDensity {
        LogDensity::Finite(StudentTProposal::log_density(self, x))
    }
}

/// JSON form of a fitted proposal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalState {
    pub mean: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub nu: f64,
    pub n_samples: u64,
}
