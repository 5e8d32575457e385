use std::process::ExitCode;

use clap::Parser;
use garch_mcmc_cli::{compare, run, Cli, Command, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Compare { a, b }) => compare(&a, &b).map(|c| {
            print!("{}", c.render());
            true
        }),
        Some(Command::Run(args)) => execute(args),
        None => execute(cli.run),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(args: garch_mcmc_cli::RunArgs) -> anyhow::Result<bool> {
    let cfg = RunConfig::try_from(args)?;
    let outcome = run(&cfg)?;
    for c in &outcome.chains {
        if outcome.chains.len() > 1 {
            println!("== {}", c.dir.display());
        }
        print!("{}", c.text);
    }
    if let Some(spread) = &outcome.spread {
        println!();
        print!("{}", spread.render());
    }
    println!("outputs written to {}", cfg.out.display());
    if !outcome.all_plateaued() {
        eprintln!("error: no τ_int plateau for at least one parameter; increase --total or --window-factor");
        return Ok(false);
    }
    Ok(true)
}
