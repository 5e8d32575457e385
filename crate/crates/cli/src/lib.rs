//! Library side of the `garch-mcmc` command: configuration, run
//! orchestration, output files, and run comparison.

pub mod args;
pub mod compare;
pub mod config;
pub mod output;
pub mod run;

pub use args::{Cli, Command, RunArgs, SamplerKind};
pub use compare::{compare, Comparison};
pub use config::{InputSource, RunConfig};
pub use run::{run, ChainOutcome, RunOutcome};
