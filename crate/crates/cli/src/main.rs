use clap::Parser;
use std::process::ExitCode;
use wgqed_cli::{render, run, CliError, Command, Document};

/// Waveguide QED bound states, spectra and rates.
#[derive(Parser, Debug)]
#[command(name = "wgqed", version, about)]
struct Args {
    /// Configuration file with one `key=value` per line.
    #[arg(long, value_name = "FILE")]
    config: Option<String>,
    /// Output format (overrides `format=`).
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Write to this file instead of stdout (overrides `output=`).
    #[arg(long, value_name = "PATH")]
    output: Option<String>,
    /// Report errors as JSON on stderr.
    #[arg(long)]
    error_json: bool,
    /// Subcommand followed by `KEY=VALUE` overrides.
    #[arg(value_name = "COMMAND | KEY=VALUE")]
    rest: Vec<String>,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let mut doc = Document::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        doc.add_text(path, &text)?;
    }
    let mut rest = args.rest.as_slice();
    if let Some(first) = rest.first().filter(|a| !a.contains('=')) {
        doc.set("command", first, "command line")?;
        rest = &rest[1..];
    }
    doc.add_args(rest)?;
    if let Some(f) = &args.format {
        doc.set("format", f, "--format")?;
    }
    if let Some(o) = &args.output {
        doc.set("output", o, "--output")?;
    }
    let cfg = doc.finish()?;
    if cfg.command == Command::Spectrum && cfg.params.gamma_a == 0.0 {
        eprintln!("warning: gamma_a = 0, the spectrum is an unnormalized shape");
    }
    let table = run(&cfg)?;
    let failed = if cfg.command == Command::Selftest { wgqed_cli::selftest::failures(&table) } else { 0 };
    let text = render(&cfg, &table);
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }?;
    if failed > 0 {
        return Err(CliError::SelftestFailed { failed, total: table.rows.len() });
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if args.error_json {
                eprintln!("{}", e.to_json());
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
