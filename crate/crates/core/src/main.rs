use clap::Parser;

fn main() {
    let cli = vbforms::cli::Cli::parse();
    std::process::exit(vbforms::cli::run(cli));
}
