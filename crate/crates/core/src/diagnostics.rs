//! Autocorrelation functions, integrated autocorrelation times, and the
//! per-parameter summary of a chain.
//!
//! ACF at lag `t` is the mean of the `N - t` available lagged products of
//! the centered series divided by the full-series (population) variance.
//! The integrated time is `τ(T) = ½ + Σ_{t=1..T} ACF(t)`, read off at the
//! smallest window `T` with `T >= c · τ(T)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{N_PARAMS, PARAM_NAMES};
use crate::samplers::Chain;

/// Default window factor `c`.
pub const DEFAULT_WINDOW_FACTOR: f64 = 5.0;
/// Hard cap on the number of lags examined.
pub const MAX_LAG_CAP: usize = 10_000;
/// Segments used by the blocked jackknife.
pub const JACKKNIFE_BLOCKS: usize = 10;
/// Shortest chain [`summarize`] accepts.
pub const MIN_CHAIN_LEN: usize = 1000;

/// `ACF(0..=T_max)` of a series of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfSeries {
    values: Vec<f64>,
    n: usize,
}

impl AcfSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Length of the series the ACF was computed from.
    pub fn series_len(&self) -> usize {
        self.n
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    fn truncated(mut self, max_lag: usize) -> Self {
        self.values.truncate(max_lag + 1);
        self
    }
}

/// Lagged-product sums `S_t = Σ_j d_j d_{j+t}` for `t = 0..=max_lag` via a
/// zero-padded FFT.
fn lagged_sums(d: &[f64], max_lag: usize) -> Vec<f64> {
    let n = d.len();
    let len = (n + max_lag + 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut buf: Vec<Complex<f64>> = d
        .iter()
        .map(|v| Complex::new(*v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    fwd.process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    buf[..=max_lag].iter().map(|c| c.re / len as f64).collect()
}

/// Autocorrelation function up to lag `max_lag`.
pub fn acf(x: &[f64], max_lag: usize) -> Result<AcfSeries> {
    let n = x.len();
    if max_lag < 1 || n <= max_lag {
        return Err(Error::Config(format!(
            "need 1 <= max_lag < series length, got max_lag={max_lag}, length={n}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("series value"));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let var = d.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if var.is_nan() || var <= 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let sums = lagged_sums(&d, max_lag);
    let mut values = Vec::with_capacity(max_lag + 1);
    values.push(1.0);
    values.extend((1..=max_lag).map(|t| sums[t] / (n - t) as f64 / var));
    Ok(AcfSeries { values, n })
}

/// Lag bound used when none is given: `min(N/10, 10·T₀, 10⁴)` where `T₀`
/// is the first lag with `ACF < 0.01`. Returns the ACF truncated there.
pub fn acf_auto(x: &[f64]) -> Result<AcfSeries> {
    let cap = (x.len() / 10).clamp(1, MAX_LAG_CAP);
    let full = acf(x, cap)?;
    let max_lag = match full.values.iter().position(|r| *r < 0.01) {
        Some(t0) => (10 * t0).clamp(1, cap),
        None => cap,
    };
    Ok(full.truncated(max_lag))
}

/// `τ(T)` for `T = 0..=T_max`.
pub fn tau_int_curve(acf: &AcfSeries) -> Vec<f64> {
    let mut curve = Vec::with_capacity(acf.values.len());
    let mut tau = 0.5;
    curve.push(tau);
    for r in &acf.values[1..] {
        tau += r;
        curve.push(tau);
    }
    curve
}

/// Windowed integrated-autocorrelation-time estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TauInt {
    pub tau: f64,
    /// Chosen summation window `T*`.
    pub window: usize,
    /// `sqrt(2 (2T* + 1) / N) · τ`.
    pub uncertainty: f64,
}

/// Reads `τ_int` at the smallest `T >= 1` with `T >= c · τ(T)`.
pub fn tau_int(acf: &AcfSeries, window_factor: f64) -> Result<TauInt> {
    let curve = tau_int_curve(acf);
    match (1..curve.len()).find(|&t| t as f64 >= window_factor * curve[t]) {
        Some(window) => {
            let tau = curve[window];
            let uncertainty = (2.0 * (2 * window + 1) as f64 / acf.n as f64).sqrt() * tau;
            Ok(TauInt {
                tau,
                window,
                uncertainty,
            })
        }
        None => Err(Error::NoPlateau {
            max_lag: acf.max_lag(),
            lower_bound: curve[curve.len() - 1],
        }),
    }
}

/// Jackknife error of `2τ_int` over [`JACKKNIFE_BLOCKS`] contiguous blocks,
/// each estimate using the same lag bound as the full series. `None` if any
/// leave-one-out estimate fails.
pub fn jackknife_two_tau_err(x: &[f64], max_lag: usize, window_factor: f64) -> Option<f64> {
    let b = JACKKNIFE_BLOCKS;
    let block = x.len() / b;
    if block == 0 {
        return None;
    }
    let mut estimates = Vec::with_capacity(b);
    for i in 0..b {
        let end = if i + 1 == b { x.len() } else { (i + 1) * block };
        let rest: Vec<f64> = x[..i * block].iter().chain(&x[end..]).copied().collect();
        let r = acf(&rest, max_lag.min(rest.len().saturating_sub(1))).ok()?;
        estimates.push(2.0 * tau_int(&r, window_factor).ok()?.tau);
    }
    let mean = estimates.iter().sum::<f64>() / b as f64;
    let ss: f64 = estimates.iter().map(|e| (e - mean).powi(2)).sum();
    Some(((b - 1) as f64 / b as f64 * ss).sqrt())
}

/// Table-1 style statistics of one scalar series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub mean: f64,
    pub stddev: f64,
    /// `stddev · sqrt(2τ_int / k)`.
    pub stat_error: f64,
    pub two_tau_int: f64,
    pub two_tau_int_err: f64,
    pub two_tau_int_err_jackknife: Option<f64>,
    pub window: usize,
    /// `false` when no window satisfied the plateau condition; `two_tau_int`
    /// is then only a lower bound.
    pub plateau: bool,
    #[serde(skip)]
    pub acf: Vec<f64>,
    #[serde(skip)]
    pub tau_curve: Vec<f64>,
}

pub fn summarize_series(x: &[f64], window_factor: f64) -> Result<SeriesSummary> {
    let k = x.len() as f64;
    let mean = x.iter().sum::<f64>() / k;
    let stddev = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k).sqrt();
    let r = acf_auto(x)?;
    let tau_curve = tau_int_curve(&r);
    let (tau, window, uncertainty, plateau) = match tau_int(&r, window_factor) {
        Ok(t) => (t.tau, t.window, t.uncertainty, true),
        Err(Error::NoPlateau {
            max_lag,
            lower_bound,
        }) => {
            let unc = (2.0 * (2 * max_lag + 1) as f64 / k).sqrt() * lower_bound;
            (lower_bound, max_lag, unc, false)
        }
        Err(e) => return Err(e),
    };
    let two_tau_int_err_jackknife = if plateau {
        jackknife_two_tau_err(x, r.max_lag(), window_factor)
    } else {
        None
    };
    // Sampling noise can push the estimate for near-independent draws below
    // the i.i.d. value; the report never claims better than independence.
    let tau = tau.max(0.5);
    Ok(SeriesSummary {
        mean,
        stddev,
        stat_error: stddev * (2.0 * tau / k).sqrt(),
        two_tau_int: 2.0 * tau,
        two_tau_int_err: 2.0 * uncertainty,
        two_tau_int_err_jackknife,
        window,
        plateau,
        acf: r.values,
        tau_curve,
    })
}

/// Per-parameter summaries of a GARCH chain plus its acceptance rate.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub params: Vec<SeriesSummary>,
    pub acceptance: f64,
    pub n_draws: usize,
    pub window_factor: f64,
}

pub fn summarize(chain: &Chain, window_factor: f64) -> Result<DiagnosticsReport> {
    if chain.len() < MIN_CHAIN_LEN {
        return Err(Error::InsufficientData {
            needed: MIN_CHAIN_LEN,
            got: chain.len(),
        });
    }
    let params = (0..N_PARAMS)
        .map(|i| summarize_series(&chain.column(i), window_factor))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticsReport {
        params,
        acceptance: chain.acceptance_rate(),
        n_draws: chain.len(),
        window_factor,
    })
}

/// JSON form of a [`DiagnosticsReport`]: one object per statistic, keyed by
/// parameter name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub mean: BTreeMap<String, f64>,
    pub stddev: BTreeMap<String, f64>,
    pub stat_error: BTreeMap<String, f64>,
    pub two_tau_int: BTreeMap<String, f64>,
    pub two_tau_int_err: BTreeMap<String, f64>,
    pub two_tau_int_err_jackknife: BTreeMap<String, Option<f64>>,
    pub window: BTreeMap<String, usize>,
    pub plateau: BTreeMap<String, bool>,
    pub acceptance: f64,
    pub n_draws: usize,
    pub window_factor: f64,
}

impl DiagnosticsReport {
    pub fn all_plateaued(&self) -> bool {
        self.params.iter().all(|p| p.plateau)
    }

    pub fn to_json(&self) -> ReportJson {
        fn by_name<T>(
            params: &[SeriesSummary],
            f: impl Fn(&SeriesSummary) -> T,
        ) -> BTreeMap<String, T> {
            PARAM_NAMES
                .iter()
                .zip(params)
                .map(|(n, p)| (n.to_string(), f(p)))
                .collect()
        }
        let p = &self.params;
        ReportJson {
            mean: by_name(p, |s| s.mean),
            stddev: by_name(p, |s| s.stddev),
            stat_error: by_name(p, |s| s.stat_error),
            two_tau_int: by_name(p, |s| s.two_tau_int),
            two_tau_int_err: by_name(p, |s| s.two_tau_int_err),
            two_tau_int_err_jackknife: by_name(p, |s| s.two_tau_int_err_jackknife),
            window: by_name(p, |s| s.window),
            plateau: by_name(p, |s| s.plateau),
            acceptance: self.acceptance,
            n_draws: self.n_draws,
            window_factor: self.window_factor,
        }
    }
}

/// Four significant figures, never scientific notation.
pub fn sig4(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (3 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

fn tau_cell(two_tau: f64, err: f64, plateau: bool) -> String {
    let decimals = if two_tau < 100.0 { 1 } else { 0 };
    let bound = if plateau { "" } else { ">= " };
    format!("{bound}{two_tau:.decimals$} ± {err:.decimals$}")
}

/// One Table-1 block; `label` names the mean row.
pub fn render_block(label: &str, report: &ReportJson) -> String {
    let mut out = String::new();
    let row = |out: &mut String, name: &str, cells: Vec<String>| {
        let _ = write!(out, "{name:<24}");
        for c in cells {
            let _ = write!(out, "{c:>18}");
        }
        out.push('\n');
    };
    let cells = |m: &BTreeMap<String, f64>| PARAM_NAMES.iter().map(|n| sig4(m[*n])).collect();
    row(&mut out, label, cells(&report.mean));
    row(&mut out, "standard deviation", cells(&report.stddev));
    row(&mut out, "statistical error", cells(&report.stat_error));
    row(
        &mut out,
        "2τ_int",
        PARAM_NAMES
            .iter()
            .map(|n| {
                tau_cell(
                    report.two_tau_int[*n],
                    report.two_tau_int_err[*n],
                    report.plateau[*n],
                )
            })
            .collect(),
    );
    out
}

pub fn render_header() -> String {
    let mut out = format!("{:<24}", "");
    for n in PARAM_NAMES {
        let _ = write!(out, "{n:>18}");
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{SeedSequence, Stream};
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = SeedSequence::new(seed).stream(Stream::Sampling);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
        let e = normals(n + 1000, seed);
        let mut x = 0.0;
        let mut out = Vec::with_capacity(n);
        for (i, v) in e.into_iter().enumerate() {
            x = phi * x + v;
            if i >= 1000 {
                out.push(x);
            }
        }
        out
    }

    /// Direct double loop over lagged pairs.
    fn brute_acf(x: &[f64], max_lag: usize) -> Vec<f64> {
        let n = x.len();
        let m = x.iter().sum::<f64>() / n as f64;
        let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
        (0..=max_lag)
            .map(|t| {
                let mut s = 0.0;
                for j in 0..n - t {
                    s += (x[j] - m) * (x[j + t] - m);
                }
                s / (n - t) as f64 / var
            })
            .collect()
    }

    #[test]
    fn acf_of_alternating_series() {
        let x: Vec<f64> = (0..10_000)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let r = acf(&x, 4).unwrap();
        assert_eq!(r.values()[0], 1.0);
        assert!((r.values()[1] + 1.0).abs() < 1e-9);
        assert!((r.values()[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn acf_errors() {
        assert!(matches!(acf(&[2.0; 50], 3), Err(Error::DegenerateSeries)));
        assert!(acf(&[1.0, 2.0, 3.0], 3).is_err());
        assert!(acf(&[1.0, 2.0, 3.0], 0).is_err());
    }

    #[test]
    fn acf_and_tau_match_brute_force() {
        for (n, seed) in [(500usize, 1u64), (3_000, 2), (10_000, 3)] {
            let x = ar1(n, 0.7, seed);
            let max_lag = n / 10;
            let fast = acf(&x, max_lag).unwrap();
            let slow = brute_acf(&x, max_lag);
            for (a, b) in fast.values().iter().zip(&slow) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
            let tau = tau_int(&fast, 5.0).unwrap();
            let slow_curve: Vec<f64> = slow[1..]
                .iter()
                .scan(0.5, |acc, r| {
                    *acc += r;
                    Some(*acc)
                })
                .collect();
            let w = (1..=max_lag)
                .find(|&t| t as f64 >= 5.0 * slow_curve[t - 1])
                .unwrap();
            assert_eq!(tau.window, w);
            assert!((tau.tau - slow_curve[w - 1]).abs() < 1e-10);
        }
    }

    #[test]
    fn white_noise_acf_is_small() {
        let x = normals(1_000_000, 4);
        let r = acf(&x, 100).unwrap();
        for v in &r.values()[1..] {
            assert!(v.abs() < 0.005, "{v}");
        }
        let t = tau_int(&acf_auto(&x).unwrap(), 5.0).unwrap();
        assert!((t.tau - 0.5).abs() < 0.05, "{}", t.tau);
    }

    #[test]
    fn ar1_acf_and_tau() {
        let phi: f64 = 0.9;
        let x = ar1(1_000_000, phi, 5);
        let r = acf_auto(&x).unwrap();
        for t in 0..=20 {
            assert!((r.values()[t] - phi.powi(t as i32)).abs() < 0.02);
        }
        let tau = tau_int(&r, 5.0).unwrap();
        assert!((tau.tau - 9.5).abs() / 9.5 < 0.1, "{}", tau.tau);
        assert!(tau.uncertainty > 0.0 && tau.uncertainty < 0.5);
    }

    #[test]
    fn no_plateau_reports_lower_bound() {
        // A slow random walk never satisfies T >= 5 τ(T) within 20 lags.
        let mut s = 0.0;
        let x: Vec<f64> = normals(400, 6)
            .into_iter()
            .map(|e| {
                s += e;
                s
            })
            .collect();
        let r = acf(&x, 20).unwrap();
        match tau_int(&r, 5.0) {
            Err(Error::NoPlateau {
                max_lag,
                lower_bound,
            }) => {
                assert_eq!(max_lag, 20);
                assert_eq!(lower_bound, *tau_int_curve(&r).last().unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn thinning_reduces_tau() {
        let x = ar1(1_000_000, 0.9, 7);
        let full = tau_int(&acf_auto(&x).unwrap(), 5.0).unwrap().tau;
        let thinned: Vec<f64> = x.iter().step_by(10).copied().collect();
        let thin = tau_int(&acf_auto(&thinned).unwrap(), 5.0).unwrap().tau;
        assert!(2.0 * thin < 2.0 * full);
        // 1 + 2 φ^10 / (1 - φ^10) ≈ 2.07
        assert!((2.0 * thin - 2.07).abs() < 0.2, "{thin}");
    }

    #[test]
    fn iid_statistical_error_is_naive_error() {
        let x: Vec<f64> = normals(100_000, 8).into_iter().map(|v| 3.0 * v).collect();
        let s = summarize_series(&x, 5.0).unwrap();
        let naive = s.stddev / (x.len() as f64).sqrt();
        assert!((s.stat_error - naive).abs() / naive < 0.15);
        assert!((s.stddev - 3.0).abs() < 0.05);
        assert!(s.plateau);
        assert!(s.two_tau_int >= 1.0 - 1e-6 && s.two_tau_int < 1.1);
    }

    #[test]
    fn duplicating_draws_doubles_two_tau() {
        let x = normals(100_000, 9);
        let dup: Vec<f64> = x.iter().flat_map(|v| [*v, *v]).collect();
        let a = summarize_series(&x, 5.0).unwrap();
        let b = summarize_series(&dup, 5.0).unwrap();
        let ratio = b.two_tau_int / a.two_tau_int;
        assert!((1.8..=2.2).contains(&ratio), "{ratio}");
        assert!((a.stddev - b.stddev).abs() < 1e-12);
    }

    #[test]
    fn jackknife_is_comparable_to_window_formula() {
        let x = ar1(200_000, 0.5, 10);
        let s = summarize_series(&x, 5.0).unwrap();
        let jk = s.two_tau_int_err_jackknife.unwrap();
        assert!(
            jk > 0.0 && jk < 10.0 * s.two_tau_int_err,
            "{jk} vs {}",
            s.two_tau_int_err
        );
    }

    #[test]
    fn summarize_requires_enough_draws() {
        assert!(matches!(
            summarize(&Chain::default(), 5.0),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn table_rendering() {
        assert_eq!(sig4(0.031512), "0.03151");
        assert_eq!(sig4(0.94031), "0.9403");
        assert_eq!(sig4(123.456), "123.5");
        assert_eq!(tau_cell(2.84, 0.31, true), "2.8 ± 0.3");
        assert_eq!(tau_cell(401.0, 60.2, false), ">= 401 ± 60");
    }
}
