use clap::Parser;

fn main() {
    let cli = entropix_cli::Cli::parse();
    std::process::exit(entropix_cli::run(cli));
}
