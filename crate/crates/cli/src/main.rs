use std::io::Write as _;
use std::process::ExitCode;

use clap::Parser;
use germforge_cli::commands::run;
use germforge_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = run(&cli);
    if let Some(e) = &out.error {
        eprintln!("germforge: {e}");
    }
    let rendered = out.rendered();
    let target = cli.command.common().out.as_ref();
    let written = match target {
        Some(path) => std::fs::write(path, rendered).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(rendered.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("germforge: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(out.exit_code() as u8)
}
