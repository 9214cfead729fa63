use clap::Parser;

fn main() {
    // CDR_LOG selects log verbosity (error|warn|info|debug); it never
    // changes behavior, only what gets narrated to stderr.
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CDR_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = cdr_cli::Cli::parse();
    if let Err(err) = cdr_cli::run(&cli) {
        eprintln!("cdr: {err}");
        std::process::exit(err.exit_code());
    }
}
