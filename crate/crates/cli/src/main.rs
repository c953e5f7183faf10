mod args;
mod fmt;
mod ops;

use clap::Parser;

use args::{Cli, Command};

fn run(cli: Cli) -> ops::CliResult<()> {
    match cli.command {
        Command::Construct { model, out } => ops::run_construct(&model, &out),
        Command::Sweep { model, sweep, out } => ops::run_sweep(&model, &sweep, &out),
        Command::Fit {
            model,
            sweep,
            csv,
            out,
        } => ops::run_fit(&model, &sweep, &csv, &out),
        Command::Monodromy {
            model,
            center,
            radius,
            loops,
            steps,
            out,
        } => ops::run_monodromy(&model, center, radius, loops, steps, &out),
        Command::Locate {
            model,
            order,
            lambda0,
            p0,
            out,
        } => ops::run_locate(&model, order, lambda0, &p0, &out),
        Command::Classify {
            model,
            lambda,
            center,
            out,
        } => ops::run_classify(&model, lambda, center, &out),
        Command::Helix {
            model,
            lambda,
            center,
            out,
        } => ops::run_helix(&model, lambda, center, &out),
        Command::Verify { model } => ops::run_verify(&model),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.code());
    }
}
