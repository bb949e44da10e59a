use clap::Parser;

use treelike::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error[{}]: {}", e.kind(), e.to_string().replace('\n', " "));
        std::process::exit(e.kind().exit_code());
    }
}
