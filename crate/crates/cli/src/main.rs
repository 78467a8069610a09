use std::process::ExitCode;

use clap::Parser;

use detcouple_cli::{parse_config, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    let outcome = parse_config(args).and_then(|cfg| run(kind, &cfg));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("detcouple: checks failed; see the report in the output directory");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("detcouple: {e}");
            ExitCode::from(2)
        }
    }
}
