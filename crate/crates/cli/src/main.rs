use clap::Parser;
use znd_cli::{exit_code, run_cli, Cli};

fn main() {
    let cli = Cli::parse();
    let result = run_cli(&cli);
    if let Err(e) = &result {
        eprintln!("znd: {e}");
    }
    std::process::exit(exit_code(&result));
}
