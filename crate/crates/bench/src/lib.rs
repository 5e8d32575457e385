//! Shared fixtures for the benchmarks.

use garch_mcmc::data::{generate_synthetic, SyntheticSpec};
use garch_mcmc::{ParamVector, ReturnSeries, SampleAccumulator, StudentTProposal};

pub const TRUTH: ParamVector = ParamVector {
    alpha: 0.03,
    beta: 0.94,
    omega: 0.011,
};

pub fn returns(n: usize) -> ReturnSeries {
    generate_synthetic(&SyntheticSpec::stationary(TRUTH, n, 1)).expect("valid spec")
}

/// A proposal centred near the truth with a small diagonal spread.
pub fn proposal() -> StudentTProposal {
    let mut acc = SampleAccumulator::new(3);
    let t = [TRUTH.alpha, TRUTH.beta, TRUTH.omega];
    let s = [0.01, 0.02, 0.005];
    for k in 0..8 {
        let x: Vec<f64> = (0..3)
            .map(|i| t[i] + s[i] * if (k >> i) & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        acc.push(&x);
    }
    StudentTProposal::fit(&acc, 10.0).expect("non-degenerate")
}
