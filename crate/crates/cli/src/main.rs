use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use cqexp::{run, Cli, CliError};

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = run(&cli).and_then(|outcome| {
        emit(&cli, &outcome.output)?;
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => {
            if code == 1 {
                eprintln!("cqexp: inequality violations found");
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("cqexp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
