use clap::Parser;

use efdd::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    if let Err(e) = run(cli, &mut stdout.lock()) {
        eprintln!("efdd: {e}");
        std::process::exit(e.exit_code());
    }
}
