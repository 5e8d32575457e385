use garch_mcmc::data::{generate_synthetic, read_prices, SyntheticSpec};
use garch_mcmc::diagnostics::summarize;
use garch_mcmc::rng::SeedSequence;
use garch_mcmc::samplers::{run_adaptive, run_metropolis, AdaptiveOptions, AdaptiveSchedule};
use garch_mcmc::{check_constraints, GarchPosterior, ParamVector, Sigma1Policy};

fn posterior(seed: u64) -> GarchPosterior {
    let theta = ParamVector::new(0.05, 0.9, 0.02);
    let y = generate_synthetic(&SyntheticSpec::stationary(theta, 4000, seed)).unwrap();
    GarchPosterior::new(y, Sigma1Policy::SampleVariance).unwrap()
}

const SCHED: AdaptiveSchedule = AdaptiveSchedule {
    burn_in: 1000,
    pilot: 1000,
    refit_interval: 1000,
    total: 20_000,
};

#[test]
fn adaptive_run_stays_in_support_and_decorrelates() {
    let post = posterior(21);
    let run = run_adaptive(
        &post,
        &SCHED,
        &AdaptiveOptions::default(),
        &SeedSequence::new(21),
    )
    .unwrap();
    assert_eq!(run.chain.len(), SCHED.total);
    assert_eq!(run.proposal_history.len(), SCHED.batches());
    assert_eq!(run.acceptance_trace.len(), SCHED.batches());
    assert!(run
        .chain
        .draws
        .iter()
        .all(|d| check_constraints(d).unwrap()));
    let report = summarize(&run.chain, 5.0).unwrap();
    assert!(report.all_plateaued());
    assert!(report.acceptance > 0.3, "{}", report.acceptance);
    // later fits are built from more draws
    let n: Vec<u64> = run.proposal_history.iter().map(|p| p.n_samples()).collect();
    assert!(n.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn adaptive_beats_random_walk_on_same_data() {
    let post = posterior(22);
    let seeds = SeedSequence::new(22);
    let ad = run_adaptive(&post, &SCHED, &AdaptiveOptions::default(), &seeds).unwrap();
    let rw = run_metropolis(
        &post,
        &SCHED,
        &AdaptiveOptions::default().metropolis,
        &seeds,
    )
    .unwrap();
    let (a, r) = (
        summarize(&ad.chain, 5.0).unwrap(),
        summarize(&rw.chain, 5.0).unwrap(),
    );
    for (pa, pr) in a.params.iter().zip(&r.params) {
        assert!(
            pr.two_tau_int > 5.0 * pa.two_tau_int,
            "{} vs {}",
            pr.two_tau_int,
            pa.two_tau_int
        );
    }
}

#[test]
fn price_file_to_posterior() {
    let csv = "date,close\n2024-01-01,100\n2024-01-02,101\n2024-01-03,99.5\n2024-01-04,100.2\n";
    let prices = read_prices(csv.as_bytes()).unwrap();
    let returns = prices.to_returns().unwrap();
    assert_eq!(returns.len(), 3);
    let lr = [
        (101f64 / 100.0).ln(),
        (99.5f64 / 101.0).ln(),
        (100.2f64 / 99.5).ln(),
    ];
    let mean = lr.iter().sum::<f64>() / 3.0;
    for (r, l) in returns.iter().zip(lr) {
        assert!((r - 100.0 * (l - mean)).abs() < 1e-12);
    }
    let post = GarchPosterior::new(returns, Sigma1Policy::Fixed(1.0)).unwrap();
    let lp = post
        .log_posterior(&ParamVector::new(0.1, 0.8, 0.1))
        .unwrap();
    assert!(!lp.is_excluded());
    assert!(post
        .log_posterior(&ParamVector::new(0.5, 0.6, 0.1))
        .unwrap()
        .is_excluded());
}
