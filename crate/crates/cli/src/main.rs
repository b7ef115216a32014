//! `topoedge` experiment runner.

mod config;
mod experiments;

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{resolve, Format, Globals, Params, Resolved};

#[derive(Parser)]
#[command(name = "topoedge", version, about = "Edge entanglement experiments on small lattices")]
struct Cli {
    /// JSON config; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for JSON records and CSV curves.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Format written to stdout.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Topological entanglement entropy from region entropies.
    Tee(Params),
    /// Edge Hamiltonian of an annulus chain and its Gibbs distance.
    EdgeHamiltonian(Params),
    /// Best local Gibbs fit of the edge state.
    GibbsFit(Params),
    /// Doubled-spectrum match on a cylinder, one point per cutoff.
    SpectrumMatch(Params),
    /// Rotated Petz recovery and chained edge reconstruction.
    RecoveryCheck(Params),
    /// Convergence of MPS reduced states with chain length.
    MpsConverge(Params),
    /// Rényi area-law fit of a ring operator.
    RenyiFit(Params),
    /// Runs the experiment named in the config file.
    Run(Params),
}

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Core(topoedge::Error),
    Io(String),
}

impl From<topoedge::Error> for CliError {
    fn from(e: topoedge::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use topoedge::Error as E;
        match self {
            CliError::Schema(_) | CliError::Core(E::Domain(_) | E::Geometry(_)) => 2,
            CliError::Core(E::Resource { .. }) => 3,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "invalid configuration: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

fn write_artifacts(r: &Resolved, record: &str, csv: Option<&str>) -> Result<(), CliError> {
    let Some(dir) = &r.out else { return Ok(()) };
    let io = |e: std::io::Error| CliError::Io(format!("{dir}: {e}"));
    std::fs::create_dir_all(dir).map_err(io)?;
    let base = Path::new(dir).join(&r.experiment);
    std::fs::write(base.with_extension("json"), format!("{record}\n")).map_err(io)?;
    if let Some(c) = csv {
        std::fs::write(base.with_extension("csv"), c).map_err(io)?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (experiment, params) = match cli.command {
        Command::Tee(p) => (Some("tee"), p),
        Command::EdgeHamiltonian(p) => (Some("edge-hamiltonian"), p),
        Command::GibbsFit(p) => (Some("gibbs-fit"), p),
        Command::SpectrumMatch(p) => (Some("spectrum-match"), p),
        Command::RecoveryCheck(p) => (Some("recovery-check"), p),
        Command::MpsConverge(p) => (Some("mps-converge"), p),
        Command::RenyiFit(p) => (Some("renyi-fit"), p),
        Command::Run(p) => (None, p),
    };
    let globals = Globals { config: cli.config, seed: cli.seed, out: cli.out, threads: cli.threads, format: cli.format };
    let resolved = resolve(experiment, &params, globals)?;
    if let Some(n) = resolved.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Schema(format!("thread pool: {e}")))?;
    }
    let outcome = experiments::run(&resolved)?;
    let record = json!({
        "experiment": resolved.experiment,
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": resolved.hash(),
        "config": resolved.canonical(),
        "result": outcome.result,
    });
    let text = serde_json::to_string(&record).expect("record serializes");
    write_artifacts(&resolved, &text, outcome.csv.as_deref())?;
    match (resolved.format, &outcome.csv) {
        (Format::Csv, Some(c)) => print!("{c}"),
        (Format::Csv, None) => {
            return Err(CliError::Schema(format!("{} produces no CSV curve", resolved.experiment)));
        }
        (Format::Json, _) => println!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("topoedge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
