use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use shiftlab::corpus;
use shiftlab::error::Error;
use shiftlab::report::{run_report, Command, RunOptions};
use shiftlab::spec::{parse_system_spec, SystemSpec};

/// Languages, entropy and product-system checks for shifts of finite type
/// on Z^d.
#[derive(Debug, Parser)]
#[command(name = "shiftlab", version)]
struct Cli {
    /// Spec file, or `builtin:NAME` for a bundled example.
    #[arg(long)]
    spec: String,

    /// entropy, proj-entropy, product-check, irreducibility or full.
    #[arg(long, default_value = "full")]
    command: String,

    /// Directory for report.json and entropy.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Largest margin-extended window searched by one enumeration.
    #[arg(long)]
    max_cells: Option<usize>,

    /// Repeat comparisons with margins [-j, j]^d for j = 0..=K.
    #[arg(long, value_name = "K")]
    margin_sweep: Option<u32>,

    /// Box size bound for irreducibility checks.
    #[arg(long, default_value_t = 3)]
    scale: u64,
}

fn load(spec: &str) -> Result<SystemSpec, Error> {
    let bytes = match spec.strip_prefix("builtin:") {
        Some(name) => corpus::builtin(name)
            .ok_or_else(|| Error::Spec {
                path: String::new(),
                message: format!("no builtin spec named {name:?}"),
            })?
            .as_bytes()
            .to_vec(),
        None => std::fs::read(spec).map_err(|e| Error::Spec {
            path: String::new(),
            message: format!("cannot read {spec}: {e}"),
        })?,
    };
    parse_system_spec(&bytes)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("SHIFT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("SHIFT_THREADS must be a non-negative integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Spec { .. } => 2,
        Error::Capacity(_) => 3,
        _ => 1,
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let command: Command = cli.command.parse()?;
    let spec = load(&cli.spec)?;
    let mut opts = RunOptions {
        scale: cli.scale,
        margin_sweep: cli.margin_sweep,
        ..RunOptions::default()
    };
    if let Some(n) = cli.max_cells {
        opts.limits.max_cells = n;
    }
    let report = run_report(&spec, command, &opts)?;
    report
        .write_to(&cli.out)
        .map_err(|e| Error::Internal(format!("writing {}: {e}", cli.out.display())))?;
    println!("{}", cli.out.join("report.json").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
