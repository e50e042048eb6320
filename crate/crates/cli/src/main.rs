use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use npce_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let rendered = match run(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let written = match &cli.command.common().output {
        Some(path) => fs::write(path, &rendered.text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(rendered.text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    if rendered.converged {
        ExitCode::SUCCESS
    } else {
        eprintln!("warning: limiting distribution did not converge");
        ExitCode::from(2)
    }
}
