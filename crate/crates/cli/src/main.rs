mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::CliError;

const THREADS_VAR: &str = "MAXSHEET_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("{THREADS_VAR}: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = serde_json::to_value(&cli).expect("config serializes");
    let result = configure_threads().and_then(|()| commands::run(&cli.command, &cli.out));
    match result {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report.to_json(config)).expect("report serializes"));
            if report.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("maxsheet: {e}");
            let doc = serde_json::json!({
                "command": serde_json::to_value(&cli.command).ok().and_then(|v| v.get("name").cloned()),
                "config_echo": config,
                "verdicts": { "error": e.to_string() },
                "artifacts": [],
                "max_deviation": null,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
            match e {
                CliError::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
