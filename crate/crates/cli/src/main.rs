use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use minimax_sampler_cli::{run, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let outcome = run(&config);
    for diagnostic in &outcome.diagnostics {
        eprintln!("{diagnostic}");
    }
    let mut code = outcome.exit_code;
    if let Some(text) = &outcome.rendered {
        let written = match &config.output {
            Some(path) => std::fs::write(path, text),
            None => std::io::stdout().lock().write_all(text.as_bytes()),
        };
        if let Err(e) = written {
            eprintln!("error[Io]: cannot write report: {e}");
            code = 2;
        }
    }
    ExitCode::from(code as u8)
}
