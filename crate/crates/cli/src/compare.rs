use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Result};
use garch_mcmc::diagnostics::{render_block, render_header, ReportJson};
use garch_mcmc::PARAM_NAMES;

use crate::output::{read_json, Manifest, MANIFEST_JSON, REPORT_JSON};

/// Two finished runs side by side.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub label_a: String,
    pub label_b: String,
    pub a: ReportJson,
    pub b: ReportJson,
    /// `2τ_int(b) / 2τ_int(a)` per parameter.
    pub two_tau_ratio: BTreeMap<String, f64>,
    /// `|mean_a - mean_b| / sqrt(err_a² + err_b²)` per parameter.
    pub mean_gap: BTreeMap<String, f64>,
}

pub fn compare(dir_a: &Path, dir_b: &Path) -> Result<Comparison> {
    let man_a: Manifest = read_json(dir_a, MANIFEST_JSON)?;
    let man_b: Manifest = read_json(dir_b, MANIFEST_JSON)?;
    if man_a.data.fingerprint != man_b.data.fingerprint {
        bail!(
            "comparison refused: data fingerprints differ ({} vs {})",
            &man_a.data.fingerprint[..16],
            &man_b.data.fingerprint[..16]
        );
    }
    let a: ReportJson = read_json(dir_a, REPORT_JSON)?;
    let b: ReportJson = read_json(dir_b, REPORT_JSON)?;
    let two_tau_ratio = PARAM_NAMES
        .iter()
        .map(|n| (n.to_string(), b.two_tau_int[*n] / a.two_tau_int[*n]))
        .collect();
    let mean_gap = PARAM_NAMES
        .iter()
        .map(|n| {
            let err = a.stat_error[*n].hypot(b.stat_error[*n]);
            (n.to_string(), (a.mean[*n] - b.mean[*n]).abs() / err)
        })
        .collect();
    Ok(Comparison {
        label_a: man_a.config.sampler.label().to_string(),
        label_b: man_b.config.sampler.label().to_string(),
        a,
        b,
        two_tau_ratio,
        mean_gap,
    })
}

impl Comparison {
    pub fn render(&self) -> String {
        let mut out = render_header();
        out.push_str(&render_block(&self.label_a, &self.a));
        out.push_str(&render_block(&self.label_b, &self.b));
        out.push('\n');
        out.push_str(&format!("{:<24}", "2τ_int ratio (2nd/1st)"));
        for n in PARAM_NAMES {
            out.push_str(&format!("{:>18.2}", self.two_tau_ratio[n]));
        }
        out.push('\n');
        out.push_str(&format!("{:<24}", "mean gap / comb. error"));
        for n in PARAM_NAMES {
            out.push_str(&format!("{:>18.2}", self.mean_gap[n]));
        }
        out.push('\n');
        out
    }
}
