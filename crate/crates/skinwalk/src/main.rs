use clap::Parser;
use skinwalk::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("skinwalk: {err}");
        std::process::exit(err.exit_code());
    }
}
