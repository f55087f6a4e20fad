use clap::Parser;

fn main() {
    let cli = openfield_cli::Cli::parse();
    if let Err(e) = openfield_cli::run(cli) {
        eprintln!("openfield: {e}");
        std::process::exit(e.exit_code());
    }
}
