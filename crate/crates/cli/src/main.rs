use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ARTICAND_LOG", "warn")).init();
    let cli = articand_cli::Cli::parse();
    std::process::exit(articand_cli::run(cli));
}
