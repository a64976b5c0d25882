use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use decohere_cli::{execute, validate, CliError, Command, Format, Invocation};

/// Decoherence model runner.
#[derive(Parser, Debug)]
#[command(name = "decohere", version)]
struct Args {
    /// One of the model commands, or `validate`.
    command: String,
    /// Config file for `validate`.
    file: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value`, repeatable; wins over the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::param("config", format!("{}: {e}", path.display())))
}

fn main_inner(args: Args) -> Result<(), CliError> {
    if args.command == "validate" {
        let path = args.file.or(args.config).ok_or_else(|| CliError::param("config", "validate needs a config file"))?;
        let cfg = validate(&read(&path)?)?;
        println!("ok: {} with {} parameters", cfg.command, cfg.parameters.len());
        return Ok(());
    }
    if let Some(extra) = &args.file {
        return Err(CliError::param("command", format!("unexpected argument {}", extra.display())));
    }
    let inv = Invocation {
        command: Some(args.command.parse::<Command>()?),
        config_text: args.config.as_ref().map(read).transpose()?,
        overrides: args.set,
        out: args.out,
        format: args.format.as_deref().map(str::parse::<Format>).transpose()?,
        seed: args.seed,
    };
    let cfg = inv.resolve()?;
    let text = execute(&cfg)?;
    if cfg.output_path.is_none() {
        print!("{text}");
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
