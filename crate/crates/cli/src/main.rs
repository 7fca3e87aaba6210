use std::process::ExitCode;

use clap::Parser;
use dtamp_cli::{execute, Cli, ExitStatus, LOG_ENV};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ExitStatus::Parse.code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match execute(&cli.command, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let status = e.status();
            let line = serde_json::json!({
                "error": e.kind(),
                "exit": status.code(),
                "message": e.to_string(),
            });
            eprintln!("{line}");
            ExitCode::from(status.code() as u8)
        }
    }
}
