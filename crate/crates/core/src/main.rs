use clap::Parser;

fn main() {
    let cli = qbattery::cli::Cli::parse();
    std::process::exit(qbattery::cli::execute(&cli));
}
