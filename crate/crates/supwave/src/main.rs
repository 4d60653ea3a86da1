use clap::Parser;
use supwave::cli::Cli;

fn main() {
    std::process::exit(supwave::commands::run(Cli::parse()));
}
