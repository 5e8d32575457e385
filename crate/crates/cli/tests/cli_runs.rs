use std::path::Path;
use std::process::Command;

use garch_mcmc::samplers::AdaptiveSchedule;
use garch_mcmc::ParamVector;
use garch_mcmc_cli::output::{read_json, Manifest, MANIFEST_JSON};
use garch_mcmc_cli::{compare, run, RunConfig, SamplerKind};
use tempfile::tempdir;

fn small(sampler: SamplerKind, seed: u64, out: &Path) -> RunConfig {
    let mut cfg = RunConfig::synthetic(
        ParamVector::new(0.03, 0.94, 0.011),
        1000,
        sampler,
        seed,
        out.to_path_buf(),
    );
    cfg.schedule = AdaptiveSchedule {
        burn_in: 500,
        pilot: 500,
        refit_interval: 500,
        total: 4000,
    };
    cfg
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_garch-mcmc"))
}

#[test]
fn same_seed_gives_identical_chain_files() {
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    run(&small(SamplerKind::Adaptive, 5, a.path())).unwrap();
    run(&small(SamplerKind::Adaptive, 5, b.path())).unwrap();
    let fa = std::fs::read(a.path().join("chain.csv")).unwrap();
    let fb = std::fs::read(b.path().join("chain.csv")).unwrap();
    assert_eq!(fa, fb);
    let c = tempdir().unwrap();
    run(&small(SamplerKind::Adaptive, 6, c.path())).unwrap();
    assert_ne!(fa, std::fs::read(c.path().join("chain.csv")).unwrap());
}

#[test]
fn resumed_run_matches_direct_run() {
    let (direct, split) = (tempdir().unwrap(), tempdir().unwrap());
    run(&small(SamplerKind::Adaptive, 9, direct.path())).unwrap();
    let mut first = small(SamplerKind::Adaptive, 9, split.path());
    first.schedule.total = 2000;
    run(&first).unwrap();
    let mut second = small(SamplerKind::Adaptive, 9, split.path());
    second.resume = true;
    run(&second).unwrap();
    for f in [
        "chain.csv",
        "acceptance_trace.csv",
        "covariance_trace.csv",
        "proposal_history.json",
    ] {
        assert_eq!(
            std::fs::read(direct.path().join(f)).unwrap(),
            std::fs::read(split.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
    let m: Manifest = read_json(split.path(), MANIFEST_JSON).unwrap();
    assert_eq!(m.resumed_from, Some(2000));
}

#[test]
fn artifacts_are_complete_and_parseable() {
    let dir = tempdir().unwrap();
    let mut cfg = small(SamplerKind::Adaptive, 2, dir.path());
    cfg.dump_returns = true;
    run(&cfg).unwrap();
    for f in [
        "chain.csv",
        "acceptance_trace.csv",
        "covariance_trace.csv",
        "proposal_history.json",
        "report.txt",
        "report.json",
        "manifest.json",
        "checkpoint.json",
        "tau_curve.csv",
        "returns.csv",
    ] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    for key in [
        "mean",
        "stddev",
        "stat_error",
        "two_tau_int",
        "two_tau_int_err",
        "window",
        "plateau",
    ] {
        for p in ["alpha", "beta", "omega"] {
            assert!(
                report[key][p].is_number() || report[key][p].is_boolean(),
                "{key}.{p}"
            );
        }
    }
    assert_eq!(report["n_draws"], 4000);
    let chain = std::fs::read_to_string(dir.path().join("chain.csv")).unwrap();
    assert_eq!(chain.lines().next().unwrap(), "alpha,beta,omega,accepted");
    assert_eq!(chain.lines().count(), 4001);
    let returns = std::fs::read_to_string(dir.path().join("returns.csv")).unwrap();
    assert_eq!(returns.lines().count(), 1001);
}

#[test]
fn compare_self_has_unit_ratios_and_refuses_other_data() {
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    run(&small(SamplerKind::Adaptive, 4, a.path())).unwrap();
    let cmp = compare(a.path(), a.path()).unwrap();
    for r in cmp.two_tau_ratio.values() {
        assert_eq!(*r, 1.0);
    }
    for g in cmp.mean_gap.values() {
        assert_eq!(*g, 0.0);
    }
    // different seed -> different synthetic data
    run(&small(SamplerKind::Adaptive, 8, b.path())).unwrap();
    let err = compare(a.path(), b.path()).unwrap_err().to_string();
    assert!(err.contains("comparison refused"), "{err}");
}

#[test]
fn csv_input_runs_with_requested_length() {
    let dir = tempdir().unwrap();
    let prices = dir.path().join("prices.csv");
    // price path from a synthetic return series
    let gen = tempdir().unwrap();
    let mut cfg = small(SamplerKind::Adaptive, 1, gen.path());
    cfg.dump_returns = true;
    cfg.schedule.total = 1000;
    run(&cfg).unwrap();
    let r = std::fs::read_to_string(gen.path().join("returns.csv")).unwrap();
    let mut p = 100.0f64;
    let mut text = String::from("date,close\n");
    text.push_str(&format!("d0,{p}\n"));
    for (i, line) in r.lines().skip(1).enumerate() {
        p *= 1.0 + line.parse::<f64>().unwrap() / 100.0;
        text.push_str(&format!("d{},{p}\n", i + 1));
    }
    std::fs::write(&prices, text).unwrap();

    let out = dir.path().join("run");
    let status = bin()
        .args([
            "--csv",
            prices.to_str().unwrap(),
            "--total",
            "3000",
            "--burn-in",
            "500",
        ])
        .args([
            "--pilot",
            "500",
            "--refit-interval",
            "500",
            "--window-factor",
            "3",
        ])
        .args(["--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    let chain = std::fs::read_to_string(out.join("chain.csv")).unwrap();
    assert_eq!(
        chain.lines().count(),
        3001,
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let m: Manifest = read_json(&out, MANIFEST_JSON).unwrap();
    assert_eq!(m.data.n_returns, 1000);
}

#[test]
fn binary_rejects_bad_input() {
    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "date,close\nd1,1.0\nd2,abc\nd3,2.0\n").unwrap();
    let out = bin()
        .args(["--csv", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = bin()
        .args(["--synthetic", "--alpha", "0.5", "--beta", "0.6"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = bin().args(["--alpha", "0.1"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn binary_compare_subcommand_prints_table() {
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    run(&small(SamplerKind::Adaptive, 3, a.path())).unwrap();
    run(&small(SamplerKind::Metropolis, 3, b.path())).unwrap();
    let out = bin()
        .args([
            "compare",
            a.path().to_str().unwrap(),
            b.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Adaptive construction"));
    assert!(text.contains("Metropolis"));
    assert!(text.contains("2τ_int ratio"));
}

#[test]
fn multiple_chains_write_summary() {
    let dir = tempdir().unwrap();
    let mut cfg = small(SamplerKind::Adaptive, 11, dir.path());
    cfg.chains = 2;
    let outcome = run(&cfg).unwrap();
    assert_eq!(outcome.chains.len(), 2);
    assert!(dir.path().join("chain-1/chain.csv").exists());
    assert!(dir.path().join("chains_summary.json").exists());
    assert_ne!(
        std::fs::read(dir.path().join("chain-0/chain.csv")).unwrap(),
        std::fs::read(dir.path().join("chain-1/chain.csv")).unwrap()
    );
}
