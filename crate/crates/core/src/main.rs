use clap::Parser;

fn main() {
    std::process::exit(omt::cli::run(omt::cli::Cli::parse()));
}
