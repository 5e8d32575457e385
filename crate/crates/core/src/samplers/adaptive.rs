use serde::{Deserialize, Serialize};

use super::metropolis::{initial_theta, metropolis_step, prepare_metropolis};
use super::{independence_mh_step, AdaptiveSchedule, Chain, ChainState, MetropolisConfig};
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::model::{GarchPosterior, ParamVector, N_PARAMS};
use crate::proposal::{ProposalState, SampleAccumulator, StudentTProposal};
use crate::rng::{Rng, RngState, SeedSequence, Stream};

/// Knobs of the adaptive driver beyond the schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveOptions {
    pub nu: f64,
    /// Stop re-fitting after this many fits; `None` re-fits for the whole run.
    pub freeze_after: Option<usize>,
    /// Initial random-walk widths for burn-in and the pilot.
    pub metropolis: MetropolisConfig,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            nu: crate::proposal::DEFAULT_NU,
            freeze_after: None,
            metropolis: MetropolisConfig::uniform(N_PARAMS, 0.01),
        }
    }
}

/// What happened in one batch of independence draws.
#[derive(Debug, Clone)]
pub struct BatchReport {
    pub index: usize,
    /// The proposal fitted at the start of this batch; `None` once frozen.
    pub refit: Option<StudentTProposal>,
    /// Empirical covariance `V` the refit was computed from.
    pub covariance: Option<SquareMatrix>,
    pub acceptance: f64,
    pub draws: usize,
}

/// Independence Metropolis-Hastings whose Student's t proposal is re-fitted
/// to all retained draws before every batch.
///
/// [`AdaptiveSampler::start`] performs tuning, burn-in and the Metropolis
/// pilot; each [`AdaptiveSampler::next_batch`] call then fits and runs one
/// batch. State between batches is fully captured by [`Checkpoint`].
#[derive(Debug, Clone)]
pub struct AdaptiveSampler<'a> {
    target: &'a GarchPosterior,
    sched: AdaptiveSchedule,
    options: AdaptiveOptions,
    state: ChainState,
    acc: SampleAccumulator,
    proposal: Option<StudentTProposal>,
    fits: usize,
    rng: Rng,
    produced: usize,
    batches: usize,
    metropolis_cfg: MetropolisConfig,
}

impl<'a> AdaptiveSampler<'a> {
    pub fn start(
        target: &'a GarchPosterior,
        sched: AdaptiveSchedule,
        options: AdaptiveOptions,
        seeds: &SeedSequence,
    ) -> Result<Self> {
        sched.validate()?;
        options.metropolis.validate()?;
        let start = ChainState::at(target, initial_theta(target.returns()).to_array().to_vec())?;
        let mut tuning_rng = seeds.stream(Stream::Tuning);
        let mut burn_in_rng = seeds.stream(Stream::BurnIn);
        let prepared = prepare_metropolis(
            target,
            start,
            &options.metropolis,
            sched.burn_in,
            &mut tuning_rng,
            &mut burn_in_rng,
        )?;

        let mut state = prepared.state;
        let mut acc = SampleAccumulator::new(N_PARAMS);
        for _ in 0..sched.pilot {
            state = metropolis_step(&state, &prepared.cfg, target, &mut burn_in_rng).0;
            acc.push(&state.x);
        }
        Ok(AdaptiveSampler {
            target,
            sched,
            options,
            state,
            acc,
            proposal: None,
            fits: 0,
            rng: seeds.stream(Stream::Sampling),
            produced: 0,
            batches: 0,
            metropolis_cfg: prepared.cfg,
        })
    }

    pub fn is_done(&self) -> bool {
        self.produced >= self.sched.total
    }

    pub fn produced(&self) -> usize {
        self.produced
    }

    pub fn schedule(&self) -> &AdaptiveSchedule {
        &self.sched
    }

    /// Widths the burn-in and pilot ran with.
    pub fn metropolis_config(&self) -> &MetropolisConfig {
        &self.metropolis_cfg
    }

    pub fn proposal(&self) -> Option<&StudentTProposal> {
        self.proposal.as_ref()
    }

    pub fn current(&self) -> ParamVector {
        ParamVector::from_slice(&self.state.x)
    }

    /// Re-fits (unless frozen) and appends one batch of draws to `chain`.
    pub fn next_batch(&mut self, chain: &mut Chain) -> Result<BatchReport> {
        if self.is_done() {
            return Err(Error::Config("schedule already complete".into()));
        }
        let index = self.batches;
        let frozen = self
            .options
            .freeze_after
            .is_some_and(|n| self.fits >= n && self.proposal.is_some());
        let (refit, covariance) = if frozen {
            (None, None)
        } else {
            let covariance = self.acc.covariance();
            let prop = StudentTProposal::fit(&self.acc, self.options.nu).map_err(|e| match e {
                Error::DegenerateSample(msg) => {
                    Error::DegenerateSample(format!("batch {index}: {msg}"))
                }
                other => other,
            })?;
            self.proposal = Some(prop.clone());
            self.fits += 1;
            (Some(prop), Some(covariance))
        };
        let prop = self.proposal.as_ref().expect("fitted above");

        let draws = self
            .sched
            .refit_interval
            .min(self.sched.total - self.produced);
        let mut hits = 0usize;
        for _ in 0..draws {
            let (next, ok) = independence_mh_step(&self.state, prop, self.target, &mut self.rng);
            self.state = next;
            hits += ok as usize;
            self.acc.push(&self.state.x);
            chain.push(&self.state, ok);
        }
        self.produced += draws;
        self.batches += 1;
        Ok(BatchReport {
            index,
            refit,
            covariance,
            acceptance: hits as f64 / draws as f64,
            draws,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            schedule: self.sched,
            options: self.options.clone(),
            draws_done: self.produced,
            batches_done: self.batches,
            fits_done: self.fits,
            current: ParamVector::from_slice(&self.state.x),
            log_posterior: self.state.log_density,
            rng: RngState::capture(&self.rng),
            proposal: self.proposal.as_ref().map(StudentTProposal::state),
            accumulator: self.acc.clone(),
            metropolis: self.metropolis_cfg.clone(),
            sigma1_sq: self.target.sigma1_sq(),
            n_returns: self.target.returns().len(),
        }
    }

    /// Rebuilds a sampler from a checkpoint taken against the same data.
    ///
    /// `sched` may extend `total`; everything else must match.
    pub fn resume(
        target: &'a GarchPosterior,
        cp: &Checkpoint,
        sched: AdaptiveSchedule,
    ) -> Result<Self> {
        sched.validate()?;
        if cp.n_returns != target.returns().len() || cp.sigma1_sq != target.sigma1_sq() {
            return Err(Error::Checkpoint(
                "checkpoint was taken on different data".into(),
            ));
        }
        let same_phases = AdaptiveSchedule {
            total: cp.schedule.total,
            ..sched
        };
        if same_phases != cp.schedule || sched.total < cp.draws_done {
            return Err(Error::Checkpoint(format!(
                "schedule {sched:?} is incompatible with checkpoint schedule {:?} at draw {}",
                cp.schedule, cp.draws_done
            )));
        }
        let state = ChainState::at(target, cp.current.to_array().to_vec())?;
        if state.log_density != cp.log_posterior {
            return Err(Error::Checkpoint(
                "log-posterior of the saved state does not match".into(),
            ));
        }
        let proposal = cp
            .proposal
            .as_ref()
            .map(StudentTProposal::from_state)
            .transpose()?;
        Ok(AdaptiveSampler {
            target,
            sched,
            options: cp.options.clone(),
            state,
            acc: cp.accumulator.clone(),
            proposal,
            fits: cp.fits_done,
            rng: cp.rng.restore(),
            produced: cp.draws_done,
            batches: cp.batches_done,
            metropolis_cfg: cp.metropolis.clone(),
        })
    }
}

/// Resumable snapshot of an adaptive run, taken between batches. The chain
/// itself is not included; it lives in the run's `chain.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schedule: AdaptiveSchedule,
    pub options: AdaptiveOptions,
    pub draws_done: usize,
    pub batches_done: usize,
    pub fits_done: usize,
    pub current: ParamVector,
    pub log_posterior: f64,
    pub rng: RngState,
    pub proposal: Option<ProposalState>,
    pub accumulator: SampleAccumulator,
    pub metropolis: MetropolisConfig,
    pub sigma1_sq: f64,
    pub n_returns: usize,
}

/// Everything an adaptive run produces.
#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    pub chain: Chain,
    pub proposal_history: Vec<StudentTProposal>,
    /// Empirical covariance `V` at each refit.
    pub covariance_trace: Vec<SquareMatrix>,
    /// Acceptance of each batch.
    pub acceptance_trace: Vec<f64>,
    pub metropolis_cfg: MetropolisConfig,
    pub checkpoint: Checkpoint,
}

impl AdaptiveRun {
    fn collect(mut sampler: AdaptiveSampler<'_>, mut chain: Chain) -> Result<Self> {
        let mut proposal_history = Vec::new();
        let mut covariance_trace = Vec::new();
        let mut acceptance_trace = Vec::new();
        while !sampler.is_done() {
            let report = sampler.next_batch(&mut chain)?;
            if let Some(p) = report.refit {
                proposal_history.push(p);
            }
            if let Some(v) = report.covariance {
                covariance_trace.push(v);
            }
            acceptance_trace.push(report.acceptance);
        }
        Ok(AdaptiveRun {
            chain,
            proposal_history,
            covariance_trace,
            acceptance_trace,
            metropolis_cfg: sampler.metropolis_cfg.clone(),
            checkpoint: sampler.checkpoint(),
        })
    }
}

/// Full adaptive run: tuned Metropolis burn-in and pilot, then batches of
/// independence draws, each preceded by a re-fit to all retained draws.
pub fn run_adaptive(
    target: &GarchPosterior,
    sched: &AdaptiveSchedule,
    options: &AdaptiveOptions,
    seeds: &SeedSequence,
) -> Result<AdaptiveRun> {
    let sampler = AdaptiveSampler::start(target, *sched, options.clone(), seeds)?;
    AdaptiveRun::collect(sampler, Chain::with_capacity(sched.total))
}
