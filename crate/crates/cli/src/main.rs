use clap::Parser;

fn main() {
    let cli = fdpvar::Cli::parse();
    std::process::exit(fdpvar::run(&cli));
}
