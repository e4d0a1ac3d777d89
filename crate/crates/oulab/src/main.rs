use clap::Parser;
use oulab::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("oulab: {e}");
        std::process::exit(e.exit_code());
    }
}
