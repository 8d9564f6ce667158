use clap::Parser;
use qmacc_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    std::process::exit(qmacc_cli::execute(&cli));
}
