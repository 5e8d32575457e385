//! Markov chain kernels and the two run drivers.
//!
//! Kernels work on plain `&[f64]` states against any [`LogTarget`], so the
//! same code drives the GARCH posterior and the low-dimensional test
//! harnesses. Acceptance is decided in log space: a candidate outside the
//! support is rejected before any ratio is formed.

mod adaptive;
mod metropolis;

pub use adaptive::{
    run_adaptive, AdaptiveOptions, AdaptiveRun, AdaptiveSampler, BatchReport, Checkpoint,
};
pub use metropolis::{
    initial_theta, metropolis_step, prepare_metropolis, run_metropolis, tune_metropolis,
    MetropolisRun, Tuned, TUNING_BLOCK, TUNING_MAX_BLOCKS,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LogTarget, ParamVector, N_PARAMS};
use crate::proposal::StudentTProposal;

/// A point in the support together with its cached log density.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub x: Vec<f64>,
    pub log_density: f64,
}

impl ChainState {
    /// Evaluates `target` at `x`; errors if `x` lies outside the support.
    pub fn at<T: LogTarget + ?Sized>(target: &T, x: Vec<f64>) -> Result<Self> {
        match target.log_density(&x).value() {
            Some(log_density) => Ok(ChainState { x, log_density }),
            None => Err(Error::InvalidParameter(format!(
                "starting point {x:?} has zero target density"
            ))),
        }
    }
}

/// Sampled GARCH parameters with per-draw accept flags and cached
/// log-posterior values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Chain {
    pub draws: Vec<ParamVector>,
    pub accepted: Vec<bool>,
    pub log_posts: Vec<f64>,
}

impl Chain {
    pub fn with_capacity(n: usize) -> Self {
        Chain {
            draws: Vec::with_capacity(n),
            accepted: Vec::with_capacity(n),
            log_posts: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, state: &ChainState, accepted: bool) {
        self.draws.push(ParamVector::from_slice(&state.x));
        self.accepted.push(accepted);
        self.log_posts.push(state.log_density);
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Values of parameter `index` (0 = alpha, 1 = beta, 2 = omega).
    pub fn column(&self, index: usize) -> Vec<f64> {
        assert!(index < N_PARAMS);
        self.draws.iter().map(|d| d.to_array()[index]).collect()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.accepted.is_empty() {
            return 0.0;
        }
        self.accepted.iter().filter(|a| **a).count() as f64 / self.accepted.len() as f64
    }
}

/// Lengths of the phases of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptiveSchedule {
    /// Metropolis draws discarded before anything is retained.
    pub burn_in: usize,
    /// Metropolis draws retained to fit the first proposal.
    pub pilot: usize,
    /// Draws between proposal re-fits; also the acceptance-trace batch size.
    pub refit_interval: usize,
    /// Retained draws in the output chain.
    pub total: usize,
}

impl Default for AdaptiveSchedule {
    fn default() -> Self {
        AdaptiveSchedule {
            burn_in: 3000,
            pilot: 1000,
            refit_interval: 1000,
            total: 100_000,
        }
    }
}

impl AdaptiveSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in == 0 || self.pilot == 0 || self.refit_interval == 0 || self.total == 0 {
            return Err(Error::Config(format!(
                "schedule fields must be positive: {self:?}"
            )));
        }
        if self.refit_interval > self.total {
            return Err(Error::Config(format!(
                "refit interval {} exceeds total {}",
                self.refit_interval, self.total
            )));
        }
        Ok(())
    }

    /// Number of batches needed to produce `total` draws.
    pub fn batches(&self) -> usize {
        self.total.div_ceil(self.refit_interval)
    }
}

/// Random-walk window widths and the acceptance band tuning aims for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetropolisConfig {
    /// Full width of the uniform step for each coordinate.
    pub d: Vec<f64>,
    pub target_acceptance_floor: f64,
    pub target_acceptance_ceiling: f64,
}

impl MetropolisConfig {
    /// The same window width for every coordinate.
    pub fn uniform(dim: usize, d: f64) -> Self {
        MetropolisConfig {
            d: vec![d; dim],
            target_acceptance_floor: 0.5,
            target_acceptance_ceiling: 0.85,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d.is_empty() || self.d.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::Config(format!(
                "window widths must be positive: {:?}",
                self.d
            )));
        }
        let (lo, hi) = (self.target_acceptance_floor, self.target_acceptance_ceiling);
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::Config(format!(
                "invalid acceptance band [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    pub fn in_band(&self, acceptance: f64) -> bool {
        acceptance >= self.target_acceptance_floor && acceptance <= self.target_acceptance_ceiling
    }
}

/// Metropolis-Hastings decision for a log acceptance ratio: accepts with
/// probability `min(1, exp(log_ratio))` without ever exponentiating a
/// positive number.
pub fn accept_log_ratio<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    let u: f64 = rng.gen();
    u.ln() < log_ratio
}

/// One independence Metropolis-Hastings update with proposal `g`:
/// accept with `min(1, π(θ') g(θ) / (π(θ) g(θ')))`.
pub fn independence_mh_step<T, R>(
    current: &ChainState,
    proposal: &StudentTProposal,
    target: &T,
    rng: &mut R,
) -> (ChainState, bool)
where
    T: LogTarget + ?Sized,
    R: Rng + ?Sized,
{
    let candidate = proposal.sample(rng);
    let Some(lp_new) = target.log_density(&candidate).value() else {
        return (current.clone(), false);
    };
    let log_ratio = (lp_new - current.log_density)
        + (proposal.log_density(&current.x) - proposal.log_density(&candidate));
    if accept_log_ratio(log_ratio, rng) {
        (
            ChainState {
                x: candidate,
                log_density: lp_new,
            },
            true,
        )
    } else {
        (current.clone(), false)
    }
}
