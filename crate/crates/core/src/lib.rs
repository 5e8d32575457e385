//! Bayesian estimation of the GARCH(1,1) volatility model by Markov chain
//! Monte Carlo.
//!
//! The main sampler is an independence Metropolis-Hastings chain whose
//! multivariate Student's t proposal is periodically re-fitted to the
//! draws the chain has produced so far. A random-walk Metropolis sampler
//! is provided as a baseline, together with autocorrelation diagnostics
//! for comparing the two.

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod proposal;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
pub use model::{
    check_constraints, compute_volatility, log_likelihood, log_posterior, GarchPosterior,
    LogDensity, LogTarget, ParamVector, ReturnSeries, Sigma1Policy, VolatilitySeries, N_PARAMS,
    PARAM_NAMES,
};
pub use proposal::{SampleAccumulator, StudentTProposal};
pub use samplers::{AdaptiveSchedule, Chain, MetropolisConfig};
