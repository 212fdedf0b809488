use clap::Parser;
use lglab_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli, std::io::stdout().lock()) {
        eprintln!("lglab: {e}");
        std::process::exit(e.exit_code());
    }
}
