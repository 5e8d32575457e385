use rand::Rng;

use super::{accept_log_ratio, AdaptiveSchedule, Chain, ChainState, MetropolisConfig};
use crate::error::{Error, Result};
use crate::model::{GarchPosterior, LogTarget, ParamVector, ReturnSeries};
use crate::rng::{SeedSequence, Stream};

/// Steps per tuning block.
pub const TUNING_BLOCK: usize = 500;
/// Blocks before tuning gives up.
pub const TUNING_MAX_BLOCKS: usize = 20;

/// Random-walk Metropolis update: `x'_j = x_j + d_j (r_j - 0.5)` with
/// `r_j ~ U[0, 1)`, accepted with `min(1, π(x') / π(x))`.
pub fn metropolis_step<T, R>(
    current: &ChainState,
    cfg: &MetropolisConfig,
    target: &T,
    rng: &mut R,
) -> (ChainState, bool)
where
    T: LogTarget + ?Sized,
    R: Rng + ?Sized,
{
    let candidate: Vec<f64> = current
        .x
        .iter()
        .zip(&cfg.d)
        .map(|(x, d)| x + d * (rng.gen::<f64>() - 0.5))
        .collect();
    let Some(lp_new) = target.log_density(&candidate).value() else {
        return (current.clone(), false);
    };
    if accept_log_ratio(lp_new - current.log_density, rng) {
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

/// Outcome of [`tune_metropolis`].
#[derive(Debug, Clone)]
pub struct Tuned {
    pub cfg: MetropolisConfig,
    /// Chain position after the last tuning block.
    pub state: ChainState,
    /// Acceptance of the last block, inside the band.
    pub acceptance: f64,
    /// Window widths tried, one per block, with the acceptance each produced.
    pub history: Vec<(Vec<f64>, f64)>,
}

/// Adjusts window widths in blocks of [`TUNING_BLOCK`] steps: halve all
/// widths below the acceptance floor, double them above the ceiling, stop
/// once a block lands inside the band.
pub fn tune_metropolis<T, R>(
    start: ChainState,
    cfg: &MetropolisConfig,
    target: &T,
    rng: &mut R,
) -> Result<Tuned>
where
    T: LogTarget + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let mut cfg = cfg.clone();
    let mut state = start;
    let mut history = Vec::new();
    let mut acceptance = 0.0;
    for _ in 0..TUNING_MAX_BLOCKS {
        let mut hits = 0;
        for _ in 0..TUNING_BLOCK {
            let (next, ok) = metropolis_step(&state, &cfg, target, rng);
            state = next;
            hits += ok as usize;
        }
        acceptance = hits as f64 / TUNING_BLOCK as f64;
        history.push((cfg.d.clone(), acceptance));
        if cfg.in_band(acceptance) {
            return Ok(Tuned {
                cfg,
                state,
                acceptance,
                history,
            });
        }
        let factor = if acceptance < cfg.target_acceptance_floor {
            0.5
        } else {
            2.0
        };
        cfg.d.iter_mut().for_each(|d| *d *= factor);
    }
    Err(Error::TuningFailure {
        blocks: TUNING_MAX_BLOCKS,
        last_acceptance: acceptance,
    })
}

/// Starting point before burn-in: `(0.05, 0.90, 0.05 · var(y))`.
pub fn initial_theta(y: &ReturnSeries) -> ParamVector {
    ParamVector::new(0.05, 0.90, y.sample_variance() * (1.0 - 0.95))
}

/// A tuned random-walk chain positioned after burn-in.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub cfg: MetropolisConfig,
    pub state: ChainState,
    pub burn_in_acceptance: f64,
}

/// Tune, burn in, rescale widths per coordinate, re-tune.
///
/// The first tuning pass uses whatever widths `cfg` carries. After burn-in
/// the widths are redistributed in proportion to each coordinate's spread
/// over the second half of the burn-in (keeping their geometric mean), and
/// tuned again. Burn-in draws are discarded.
pub fn prepare_metropolis<T, R>(
    target: &T,
    start: ChainState,
    cfg: &MetropolisConfig,
    burn_in: usize,
    tuning_rng: &mut R,
    burn_in_rng: &mut R,
) -> Result<Prepared>
where
    T: LogTarget + ?Sized,
    R: Rng + ?Sized,
{
    let tuned = tune_metropolis(start, cfg, target, tuning_rng)?;
    let mut cfg = tuned.cfg;
    let mut state = tuned.state;

    let dim = state.x.len();
    let keep_from = burn_in / 2;
    let mut sums = vec![0.0; dim];
    let mut sq_sums = vec![0.0; dim];
    let mut hits = 0usize;
    for i in 0..burn_in {
        let (next, ok) = metropolis_step(&state, &cfg, target, burn_in_rng);
        state = next;
        hits += ok as usize;
        if i >= keep_from {
            for j in 0..dim {
                sums[j] += state.x[j];
                sq_sums[j] += state.x[j] * state.x[j];
            }
        }
    }
    let burn_in_acceptance = hits as f64 / burn_in.max(1) as f64;

    let kept = (burn_in - keep_from) as f64;
    if kept >= 2.0 {
        let sds: Vec<f64> = (0..dim)
            .map(|j| {
                let m = sums[j] / kept;
                (sq_sums[j] / kept - m * m).max(0.0).sqrt()
            })
            .collect();
        if sds.iter().all(|s| s.is_finite() && *s > 0.0) {
            let log_gmean_sd = sds.iter().map(|s| s.ln()).sum::<f64>() / dim as f64;
            let log_gmean_d = cfg.d.iter().map(|d| d.ln()).sum::<f64>() / dim as f64;
            cfg.d = sds
                .iter()
                .map(|s| (log_gmean_d + s.ln() - log_gmean_sd).exp())
                .collect();
            let retuned = tune_metropolis(state, &cfg, target, tuning_rng)?;
            cfg = retuned.cfg;
            state = retuned.state;
        }
    }
    Ok(Prepared {
        cfg,
        state,
        burn_in_acceptance,
    })
}

/// Result of the random-walk baseline.
#[derive(Debug, Clone)]
pub struct MetropolisRun {
    pub chain: Chain,
    /// Acceptance per batch of `refit_interval` draws.
    pub acceptance_trace: Vec<f64>,
    pub cfg: MetropolisConfig,
}

/// Tuned random-walk Metropolis: burn-in (discarded), then `total`
/// retained draws.
pub fn run_metropolis(
    target: &GarchPosterior,
    sched: &AdaptiveSchedule,
    cfg: &MetropolisConfig,
    seeds: &SeedSequence,
) -> Result<MetropolisRun> {
    sched.validate()?;
    let start = ChainState::at(target, initial_theta(target.returns()).to_array().to_vec())?;
    let mut tuning_rng = seeds.stream(Stream::Tuning);
    let mut burn_in_rng = seeds.stream(Stream::BurnIn);
    let prepared = prepare_metropolis(
        target,
        start,
        cfg,
        sched.burn_in,
        &mut tuning_rng,
        &mut burn_in_rng,
    )?;

    let mut rng = seeds.stream(Stream::Sampling);
    let mut state = prepared.state;
    let mut chain = Chain::with_capacity(sched.total);
    let mut acceptance_trace = Vec::with_capacity(sched.batches());
    let mut remaining = sched.total;
    while remaining > 0 {
        let batch = remaining.min(sched.refit_interval);
        let mut hits = 0usize;
        for _ in 0..batch {
            let (next, ok) = metropolis_step(&state, &prepared.cfg, target, &mut rng);
            state = next;
            hits += ok as usize;
            chain.push(&state, ok);
        }
        acceptance_trace.push(hits as f64 / batch as f64);
        remaining -= batch;
    }
    Ok(MetropolisRun {
        chain,
        acceptance_trace,
        cfg: prepared.cfg,
    })
}
