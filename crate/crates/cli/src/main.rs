use clap::Parser;

fn main() {
    let cli = gradsys_cli::Cli::parse();
    std::process::exit(gradsys_cli::execute(cli));
}
