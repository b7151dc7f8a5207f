use clap::Parser;

fn main() -> std::process::ExitCode {
    relent_cli::run(relent_cli::args::Cli::parse())
}
