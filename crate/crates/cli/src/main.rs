use clap::Parser;

use twofold_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("twofold: {e}");
        std::process::exit(e.exit_code());
    }
}
