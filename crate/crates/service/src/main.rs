use clap::Parser;
use ethically_service::cli::{self, exit, Cli, Command};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            });
        }
    };
    cli::init_logging(match cli.command {
        Command::Serve(_) => "info",
        _ => "warn",
    });
    let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
    std::process::exit(runtime.block_on(cli::run(cli)));
}
