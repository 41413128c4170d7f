mod args;
mod commands;
mod config;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => commands::run_synth(a),
        Command::Train(a) => commands::run_train(a),
        Command::Mlpinit(a) => commands::run_pipeline(a),
        Command::Bench(a) => commands::run_bench(a),
        Command::Linkpred(a) => commands::run_linkpred(a),
        Command::Landscape(a) => commands::run_landscape(a),
        Command::Trajectory(a) => commands::run_trajectory(a),
        Command::Hist(a) => commands::run_hist(a),
        Command::Sweep(a) => commands::run_sweep(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
