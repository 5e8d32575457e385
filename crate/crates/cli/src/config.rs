use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use garch_mcmc::{AdaptiveSchedule, ParamVector, Sigma1Policy};
use serde::{Deserialize, Serialize};

use crate::args::{RunArgs, SamplerKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InputSource {
    Csv {
        path: PathBuf,
    },
    Synthetic {
        alpha: f64,
        beta: f64,
        omega: f64,
        n: usize,
    },
}

impl InputSource {
    pub fn describe(&self) -> String {
        match self {
            InputSource::Csv { path } => format!("csv:{}", path.display()),
            InputSource::Synthetic {
                alpha,
                beta,
                omega,
                n,
            } => {
                format!("synthetic:alpha={alpha},beta={beta},omega={omega},n={n}")
            }
        }
    }

    pub fn true_theta(&self) -> Option<ParamVector> {
        match self {
            InputSource::Synthetic {
                alpha, beta, omega, ..
            } => Some(ParamVector::new(*alpha, *beta, *omega)),
            InputSource::Csv { .. } => None,
        }
    }
}

/// Fully resolved run configuration; recorded verbatim in `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: InputSource,
    pub sampler: SamplerKind,
    pub schedule: AdaptiveSchedule,
    pub nu: f64,
    pub seed: u64,
    pub sigma1: Sigma1Policy,
    pub out: PathBuf,
    pub window_factor: f64,
    pub metropolis_d: f64,
    pub chains: usize,
    pub freeze_after: Option<usize>,
    pub dump_returns: bool,
    pub resume: bool,
}

pub fn parse_sigma1(s: &str) -> Result<Sigma1Policy> {
    if s.eq_ignore_ascii_case("var") {
        return Ok(Sigma1Policy::SampleVariance);
    }
    let v: f64 = s
        .parse()
        .with_context(|| format!("--sigma1 expects `var` or a positive number, got {s:?}"))?;
    if !(v.is_finite() && v > 0.0) {
        bail!("--sigma1 must be positive, got {v}");
    }
    Ok(Sigma1Policy::Fixed(v))
}

impl TryFrom<RunArgs> for RunConfig {
    type Error = anyhow::Error;

    fn try_from(a: RunArgs) -> Result<Self> {
        let input = match (a.csv, a.synthetic) {
            (Some(path), false) => InputSource::Csv { path },
            (None, true) => InputSource::Synthetic {
                alpha: a.alpha,
                beta: a.beta,
                omega: a.omega,
                n: a.n,
            },
            (None, false) => bail!("one of --csv PATH or --synthetic is required"),
            (Some(_), true) => bail!("--csv and --synthetic are mutually exclusive"),
        };
        let cfg = RunConfig {
            input,
            sampler: a.sampler,
            schedule: AdaptiveSchedule {
                burn_in: a.burn_in,
                pilot: a.pilot,
                refit_interval: a.refit_interval,
                total: a.total,
            },
            nu: a.nu,
            seed: a.seed,
            sigma1: parse_sigma1(&a.sigma1)?,
            out: a.out,
            window_factor: a.window_factor,
            metropolis_d: a.metropolis_d,
            chains: a.chains,
            freeze_after: a.freeze_after,
            dump_returns: a.dump_returns,
            resume: a.resume,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    /// Default protocol (3000 burn-in, batches of 1000, ν = 10, 100000 draws) on a synthetic series.
    pub fn synthetic(
        theta: ParamVector,
        n: usize,
        sampler: SamplerKind,
        seed: u64,
        out: PathBuf,
    ) -> Self {
        RunConfig {
            input: InputSource::Synthetic {
                alpha: theta.alpha,
                beta: theta.beta,
                omega: theta.omega,
                n,
            },
            sampler,
            schedule: AdaptiveSchedule::default(),
            nu: 10.0,
            seed,
            sigma1: Sigma1Policy::SampleVariance,
            out,
            window_factor: garch_mcmc::diagnostics::DEFAULT_WINDOW_FACTOR,
            metropolis_d: 0.01,
            chains: 1,
            freeze_after: None,
            dump_returns: false,
            resume: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if let Some(theta) = self.input.true_theta() {
            if !garch_mcmc::check_constraints(&theta)? {
                bail!("synthetic parameters violate the GARCH(1,1) constraints: {theta:?}");
            }
            if let InputSource::Synthetic { n, .. } = self.input {
                if n < 2 {
                    bail!("--n must be at least 2");
                }
            }
        }
        if !(self.nu.is_finite() && self.nu > 2.0) {
            bail!("--nu must exceed 2, got {}", self.nu);
        }
        if !(self.window_factor.is_finite() && self.window_factor > 0.0) {
            bail!("--window-factor must be positive");
        }
        if !(self.metropolis_d.is_finite() && self.metropolis_d > 0.0) {
            bail!("--metropolis-d must be positive");
        }
        if self.chains == 0 {
            bail!("--chains must be at least 1");
        }
        if self.freeze_after == Some(0) {
            bail!("--freeze-after must be at least 1");
        }
        if self.resume && (self.sampler != SamplerKind::Adaptive || self.chains != 1) {
            bail!("--resume applies to single-chain adaptive runs only");
        }
        Ok(())
    }
}
