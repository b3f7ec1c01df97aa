use clap::Parser;

fn main() {
    let args = schroflow_cli::Args::parse();
    std::process::exit(schroflow_cli::run(&args));
}
