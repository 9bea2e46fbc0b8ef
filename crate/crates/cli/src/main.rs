use clap::Parser;

fn main() {
    let cli = oris_link::Cli::parse();
    if let Err(e) = oris_link::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
