//! On-disk formats of a run directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use garch_mcmc::diagnostics::{render_block, render_header, DiagnosticsReport, ReportJson};
use garch_mcmc::linalg::SquareMatrix;
use garch_mcmc::proposal::ProposalState;
use garch_mcmc::samplers::Chain;
use garch_mcmc::{GarchPosterior, ParamVector, PARAM_NAMES};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const CHAIN_CSV: &str = "chain.csv";
pub const ACCEPTANCE_CSV: &str = "acceptance_trace.csv";
pub const COVARIANCE_CSV: &str = "covariance_trace.csv";
pub const PROPOSALS_JSON: &str = "proposal_history.json";
pub const REPORT_TXT: &str = "report.txt";
pub const REPORT_JSON: &str = "report.json";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const CHECKPOINT_JSON: &str = "checkpoint.json";
pub const TAU_CURVE_CSV: &str = "tau_curve.csv";
pub const RETURNS_CSV: &str = "returns.csv";

/// SHA-256 over the little-endian bytes of the return series.
pub fn fingerprint(returns: &[f64]) -> String {
    let mut h = Sha256::new();
    for r in returns {
        h.update(r.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataInfo {
    pub source: String,
    pub fingerprint: String,
    pub n_returns: usize,
    pub sigma1_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: RunConfig,
    pub seed: u64,
    pub chain_index: u64,
    pub data: DataInfo,
    /// Tuned random-walk widths used during burn-in (and the pilot or main run).
    pub metropolis_d: Vec<f64>,
    /// Draw count the run was resumed from, if it was.
    pub resumed_from: Option<usize>,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(dir: &Path, name: &str) -> Result<T> {
    let path = dir.join(name);
    let f = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(std::io::BufReader::new(f))
        .with_context(|| format!("parsing {}", path.display()))
}

pub fn write_chain(dir: &Path, chain: &Chain) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(dir, CHAIN_CSV)?);
    w.write_record(["alpha", "beta", "omega", "accepted"])?;
    for (d, a) in chain.draws.iter().zip(&chain.accepted) {
        w.write_record([
            d.alpha.to_string(),
            d.beta.to_string(),
            d.omega.to_string(),
            (*a as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `chain.csv`, recomputing cached log-posteriors against `target`.
pub fn read_chain(dir: &Path, target: &GarchPosterior) -> Result<Chain> {
    let mut r = csv::Reader::from_path(dir.join(CHAIN_CSV))?;
    let mut chain = Chain::default();
    for rec in r.records() {
        let rec = rec?;
        let p = |i: usize| -> Result<f64> { Ok(rec[i].parse::<f64>()?) };
        let theta = ParamVector::new(p(0)?, p(1)?, p(2)?);
        let accepted = match &rec[3] {
            "1" => true,
            "0" => false,
            other => bail!("bad accepted flag {other:?} in {CHAIN_CSV}"),
        };
        let Some(lp) = target.log_posterior(&theta)?.value() else {
            bail!("{CHAIN_CSV} contains a draw outside the support: {theta:?}");
        };
        chain.draws.push(theta);
        chain.accepted.push(accepted);
        chain.log_posts.push(lp);
    }
    Ok(chain)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRow {
    pub batch: usize,
    pub draws: usize,
    pub acceptance: f64,
}

pub fn write_acceptance(dir: &Path, rows: &[AcceptanceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(dir, ACCEPTANCE_CSV)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_acceptance(dir: &Path) -> Result<Vec<AcceptanceRow>> {
    let mut r = csv::Reader::from_path(dir.join(ACCEPTANCE_CSV))?;
    r.deserialize().map(|row| Ok(row?)).collect()
}

/// One refit's empirical covariance `V` (upper triangle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRow {
    pub refit: usize,
    pub n_samples: u64,
    pub v_alpha_alpha: f64,
    pub v_alpha_beta: f64,
    pub v_alpha_omega: f64,
    pub v_beta_beta: f64,
    pub v_beta_omega: f64,
    pub v_omega_omega: f64,
}

impl CovarianceRow {
    pub fn new(refit: usize, n_samples: u64, v: &SquareMatrix) -> Self {
        CovarianceRow {
            refit,
            n_samples,
            v_alpha_alpha: v[(0, 0)],
            v_alpha_beta: v[(0, 1)],
            v_alpha_omega: v[(0, 2)],
            v_beta_beta: v[(1, 1)],
            v_beta_omega: v[(1, 2)],
            v_omega_omega: v[(2, 2)],
        }
    }

    pub fn elements(&self) -> [f64; 6] {
        [
            self.v_alpha_alpha,
            self.v_alpha_beta,
            self.v_alpha_omega,
            self.v_beta_beta,
            self.v_beta_omega,
            self.v_omega_omega,
        ]
    }
}

pub fn write_covariance(dir: &Path, rows: &[CovarianceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(dir, COVARIANCE_CSV)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_covariance(dir: &Path) -> Result<Vec<CovarianceRow>> {
    let mut r = csv::Reader::from_path(dir.join(COVARIANCE_CSV))?;
    r.deserialize().map(|row| Ok(row?)).collect()
}

pub fn write_proposals(dir: &Path, history: &[ProposalState]) -> Result<()> {
    write_json(dir, PROPOSALS_JSON, &history)
}

pub fn read_proposals(dir: &Path) -> Result<Vec<ProposalState>> {
    read_json(dir, PROPOSALS_JSON)
}

/// `lag, acf_<param>..., tau_<param>...`; cells past a parameter's lag
/// bound are left empty.
pub fn write_tau_curves(dir: &Path, report: &DiagnosticsReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(dir, TAU_CURVE_CSV)?);
    let mut header = vec!["lag".to_string()];
    header.extend(PARAM_NAMES.iter().map(|n| format!("acf_{n}")));
    header.extend(PARAM_NAMES.iter().map(|n| format!("tau_{n}")));
    w.write_record(&header)?;
    let rows = report.params.iter().map(|p| p.acf.len()).max().unwrap_or(0);
    for t in 0..rows {
        let mut rec = vec![t.to_string()];
        let cell = |v: Option<&f64>| v.map(f64::to_string).unwrap_or_default();
        rec.extend(report.params.iter().map(|p| cell(p.acf.get(t))));
        rec.extend(report.params.iter().map(|p| cell(p.tau_curve.get(t))));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn render_report(label: &str, report: &ReportJson, data: &DataInfo) -> String {
    let mut out = render_header();
    out.push_str(&render_block(label, report));
    out.push_str(&format!(
        "\ndraws: {}   acceptance: {:.3}   window factor c: {}\n",
        report.n_draws, report.acceptance, report.window_factor
    ));
    out.push_str(&format!(
        "data: {} ({} returns, sha256 {})\n",
        data.source,
        data.n_returns,
        &data.fingerprint[..16]
    ));
    for n in PARAM_NAMES {
        if !report.plateau[n] {
            out.push_str(&format!(
                "warning: no τ_int plateau for {n} up to T = {}; 2τ_int is a lower bound\n",
                report.window[n]
            ));
        }
    }
    out
}

pub fn write_report(
    dir: &Path,
    label: &str,
    report: &DiagnosticsReport,
    data: &DataInfo,
) -> Result<String> {
    let json = report.to_json();
    write_json(dir, REPORT_JSON, &json)?;
    let text = render_report(label, &json, data);
    let mut w = create(dir, REPORT_TXT)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    write_tau_curves(dir, report)?;
    Ok(text)
}
