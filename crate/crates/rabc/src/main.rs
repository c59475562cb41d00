use clap::Parser;

fn main() {
    let cli = rabc::cli::Cli::parse();
    std::process::exit(rabc::cli::run(cli));
}
