use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use garch_mcmc::data::{generate_synthetic, read_prices_path, write_returns, SyntheticSpec};
use garch_mcmc::diagnostics::{summarize, DiagnosticsReport};
use garch_mcmc::rng::SeedSequence;
use garch_mcmc::samplers::{
    run_metropolis, AdaptiveOptions, AdaptiveSampler, Chain, Checkpoint, MetropolisConfig,
};
use garch_mcmc::{GarchPosterior, ReturnSeries, N_PARAMS, PARAM_NAMES};
use serde::{Deserialize, Serialize};

use crate::args::SamplerKind;
use crate::config::{InputSource, RunConfig};
use crate::output::*;

/// Result of one chain, already written to `dir`.
#[derive(Debug, Clone)]
pub struct ChainOutcome {
    pub dir: PathBuf,
    pub report: DiagnosticsReport,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub chains: Vec<ChainOutcome>,
    pub data: DataInfo,
    /// Cross-chain table, when more than one chain ran.
    pub spread: Option<ChainSpread>,
}

impl RunOutcome {
    pub fn all_plateaued(&self) -> bool {
        self.chains.iter().all(|c| c.report.all_plateaued())
    }
}

pub fn load_returns(input: &InputSource, seed: u64) -> Result<ReturnSeries> {
    Ok(match input {
        InputSource::Csv { path } => read_prices_path(path)
            .with_context(|| format!("reading prices from {}", path.display()))?
            .to_returns()?,
        InputSource::Synthetic { n, .. } => {
            let theta = input.true_theta().expect("synthetic input");
            generate_synthetic(&SyntheticSpec::stationary(theta, *n, seed))?
        }
    })
}

/// Executes a full run and writes every artifact under `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let returns = load_returns(&cfg.input, cfg.seed)?;
    let posterior = GarchPosterior::new(returns, cfg.sigma1)?;
    let data = DataInfo {
        source: cfg.input.describe(),
        fingerprint: fingerprint(posterior.returns()),
        n_returns: posterior.returns().len(),
        sigma1_sq: posterior.sigma1_sq(),
    };
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    if cfg.dump_returns {
        let f = std::fs::File::create(cfg.out.join(RETURNS_CSV))?;
        write_returns(std::io::BufWriter::new(f), posterior.returns())?;
    }

    let seeds = SeedSequence::new(cfg.seed);
    if cfg.chains == 1 {
        let outcome = run_chain(cfg, &posterior, &data, seeds, &cfg.out)?;
        return Ok(RunOutcome {
            chains: vec![outcome],
            data,
            spread: None,
        });
    }

    let dirs: Vec<PathBuf> = (0..cfg.chains)
        .map(|i| cfg.out.join(format!("chain-{i}")))
        .collect();
    let results: Vec<Result<ChainOutcome>> = std::thread::scope(|s| {
        let handles: Vec<_> = dirs
            .iter()
            .enumerate()
            .map(|(i, dir)| {
                let (posterior, data) = (&posterior, &data);
                s.spawn(move || {
                    std::fs::create_dir_all(dir)?;
                    run_chain(cfg, posterior, data, seeds.for_chain(i as u64), dir)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| bail!("chain thread panicked")))
            .collect()
    });
    let chains = results.into_iter().collect::<Result<Vec<_>>>()?;
    let spread = ChainSpread::new(&chains);
    write_json(&cfg.out, "chains_summary.json", &spread)?;
    std::fs::write(cfg.out.join("chains_summary.txt"), spread.render())?;
    Ok(RunOutcome {
        chains,
        data,
        spread: Some(spread),
    })
}

fn run_chain(
    cfg: &RunConfig,
    posterior: &GarchPosterior,
    data: &DataInfo,
    seeds: SeedSequence,
    dir: &Path,
) -> Result<ChainOutcome> {
    let metropolis = MetropolisConfig::uniform(N_PARAMS, cfg.metropolis_d);
    let (chain, metropolis_d, resumed_from) = match cfg.sampler {
        SamplerKind::Metropolis => {
            let run = run_metropolis(posterior, &cfg.schedule, &metropolis, &seeds)?;
            let rows: Vec<AcceptanceRow> = run
                .acceptance_trace
                .iter()
                .enumerate()
                .map(|(batch, a)| AcceptanceRow {
                    batch,
                    draws: cfg
                        .schedule
                        .refit_interval
                        .min(cfg.schedule.total - batch * cfg.schedule.refit_interval),
                    acceptance: *a,
                })
                .collect();
            write_chain(dir, &run.chain)?;
            write_acceptance(dir, &rows)?;
            (run.chain, run.cfg.d, None)
        }
        SamplerKind::Adaptive => run_adaptive_chain(cfg, posterior, seeds, metropolis, dir)?,
    };

    let report = summarize(&chain, cfg.window_factor)?;
    let text = write_report(dir, cfg.sampler.label(), &report, data)?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        seed: cfg.seed,
        chain_index: seeds.chain,
        data: data.clone(),
        metropolis_d,
        resumed_from,
    };
    write_json(dir, MANIFEST_JSON, &manifest)?;
    Ok(ChainOutcome {
        dir: dir.to_path_buf(),
        report,
        text,
    })
}

fn run_adaptive_chain(
    cfg: &RunConfig,
    posterior: &GarchPosterior,
    seeds: SeedSequence,
    metropolis: MetropolisConfig,
    dir: &Path,
) -> Result<(Chain, Vec<f64>, Option<usize>)> {
    let (mut sampler, mut chain, mut acceptance, mut covariance, mut proposals, resumed_from) =
        if cfg.resume {
            let cp: Checkpoint = read_json(dir, CHECKPOINT_JSON)?;
            let manifest: Manifest = read_json(dir, MANIFEST_JSON)?;
            if manifest.data.fingerprint != fingerprint(posterior.returns()) {
                bail!(
                    "cannot resume: {} was produced from different data",
                    dir.display()
                );
            }
            let sampler = AdaptiveSampler::resume(posterior, &cp, cfg.schedule)?;
            let chain = read_chain(dir, posterior)?;
            if chain.len() != cp.draws_done {
                bail!(
                    "cannot resume: {CHAIN_CSV} has {} draws but the checkpoint is at {}",
                    chain.len(),
                    cp.draws_done
                );
            }
            (
                sampler,
                chain,
                read_acceptance(dir)?,
                read_covariance(dir)?,
                read_proposals(dir)?,
                Some(cp.draws_done),
            )
        } else {
            let options = AdaptiveOptions {
                nu: cfg.nu,
                freeze_after: cfg.freeze_after,
                metropolis,
            };
            let sampler = AdaptiveSampler::start(posterior, cfg.schedule, options, &seeds)?;
            (
                sampler,
                Chain::with_capacity(cfg.schedule.total),
                vec![],
                vec![],
                vec![],
                None,
            )
        };

    while !sampler.is_done() {
        let report = sampler.next_batch(&mut chain)?;
        if let (Some(p), Some(v)) = (&report.refit, &report.covariance) {
            covariance.push(CovarianceRow::new(covariance.len(), p.n_samples(), v));
            proposals.push(p.state());
        }
        acceptance.push(AcceptanceRow {
            batch: report.index,
            draws: report.draws,
            acceptance: report.acceptance,
        });
    }
    write_chain(dir, &chain)?;
    write_acceptance(dir, &acceptance)?;
    write_covariance(dir, &covariance)?;
    write_proposals(dir, &proposals)?;
    write_json(dir, CHECKPOINT_JSON, &sampler.checkpoint())?;
    Ok((chain, sampler.metropolis_config().d.clone(), resumed_from))
}

/// Spread of posterior means across independently seeded chains, next to
/// the statistical error each chain reports for itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpread {
    pub chains: usize,
    pub parameters: Vec<ParamSpread>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpread {
    pub name: String,
    pub mean_of_means: f64,
    /// Sample standard deviation of the per-chain means.
    pub spread: f64,
    /// Average of the per-chain reported statistical errors.
    pub mean_stat_error: f64,
}

impl ChainSpread {
    pub fn new(chains: &[ChainOutcome]) -> Self {
        let k = chains.len() as f64;
        let parameters = PARAM_NAMES
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let means: Vec<f64> = chains.iter().map(|c| c.report.params[i].mean).collect();
                let m = means.iter().sum::<f64>() / k;
                let spread =
                    (means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
                let mean_stat_error = chains
                    .iter()
                    .map(|c| c.report.params[i].stat_error)
                    .sum::<f64>()
                    / k;
                ParamSpread {
                    name: name.to_string(),
                    mean_of_means: m,
                    spread,
                    mean_stat_error,
                }
            })
            .collect();
        ChainSpread {
            chains: chains.len(),
            parameters,
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<10}{:>16}{:>16}{:>20}{:>10}\n",
            "parameter", "mean of means", "spread", "mean stat. error", "ratio"
        );
        for p in &self.parameters {
            out.push_str(&format!(
                "{:<10}{:>16.6}{:>16.3e}{:>20.3e}{:>10.2}\n",
                p.name,
                p.mean_of_means,
                p.spread,
                p.mean_stat_error,
                p.spread / p.mean_stat_error
            ));
        }
        out.push_str(&format!("({} chains)\n", self.chains));
        out
    }
}
