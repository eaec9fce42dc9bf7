use std::process::ExitCode;

use cavity_tangle_cli::{configure_threads, parse_config, run, CliError};

fn main() -> ExitCode {
    let result = configure_threads()
        .and_then(|_| parse_config(std::env::args()))
        .and_then(|config| run(&config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprint!("{m}{}", if m.ends_with('\n') { "" } else { "\n" }),
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
