use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use strobo::cli::{run, Command, Config, Format};
use strobo::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Map,
    Orbit,
    Curves,
    Sweep,
    Staircase,
    Farey,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

/// Stroboscopic-map analysis of pulse-driven integrate-and-fire systems.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Analysis to run.
    #[arg(value_enum)]
    command: Sub,
    /// JSON configuration file (defaults apply when omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a configuration leaf, e.g. `--set forcing.A=0.8`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Fmt::Csv)]
    format: Fmt,
}

fn execute(args: &Args) -> Result<(), Error> {
    let text = match &args.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let cfg = Config::from_json_with_overrides(text.as_deref(), &args.set)?;
    let command = match args.command {
        Sub::Map => Command::Map,
        Sub::Orbit => Command::Orbit,
        Sub::Curves => Command::Curves,
        Sub::Sweep => Command::Sweep,
        Sub::Staircase => Command::Staircase,
        Sub::Farey => Command::Farey,
    };
    let bundle = run(command, &cfg, args.workers)?;
    let format = match args.format {
        Fmt::Csv => Format::Csv,
        Fmt::Json => Format::Json,
    };
    let bytes = bundle.render(format)?;
    match &args.out {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("strobo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
