use clap::Parser;
use intbasis::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli.command) {
        let envelope = serde_json::json!({
            "error": { "kind": e.kind(), "detail": e.to_string() }
        });
        eprintln!("{envelope}");
        std::process::exit(1);
    }
}
