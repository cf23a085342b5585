use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match blocklot_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap reports help and version as errors too
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    ExitCode::from(blocklot_cli::execute(&cli))
}
