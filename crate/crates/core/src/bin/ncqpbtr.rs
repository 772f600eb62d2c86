use clap::Parser;
use ncqpbtr::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
