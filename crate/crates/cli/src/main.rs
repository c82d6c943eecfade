mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{chain, envelope, figures, gate, noise, spectral, Params};
use config::{FileConfig, Settings, DEFAULT_PRECISION, DEFAULT_SEED};
use error::{CliError, CliResult};
use output::{Manifest, Sink};

#[derive(Debug, Parser)]
#[command(name = "refocus", version, about = "Refocused addressing of qubit arrays: envelopes, ion chains, gates and noise")]
struct Cli {
    /// TOML file supplying defaults for any option.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for every output file.
    #[arg(long, global = true, env = "REFOCUS_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Seed for Monte Carlo sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Digits after the decimal point in CSV output.
    #[arg(long, global = true)]
    precision: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Correction-beam envelope for one target on a homogeneous chain.
    Envelope(envelope::EnvelopeArgs),
    /// Equilibrium positions and transverse modes of an ion chain.
    Chain(chain::ChainArgs),
    /// Detuning scan of the two-qubit gate with optimized drive amplitudes.
    Gate(gate::GateArgs),
    /// Plane-wave amplitudes that address one ion of a harmonic chain.
    Spectral(spectral::SpectralArgs),
    /// Intensity error under random beam amplitude and phase errors.
    Noise(noise::NoiseArgs),
    /// Datasets behind the standard figures.
    Figures(figures::FiguresArgs),
    /// Reproduce a previous run from its manifest.
    Rerun {
        /// Manifest written by an earlier run.
        manifest: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let out_dir = cli.out_dir.clone().or(file.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let mut settings = Settings {
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        precision: cli.precision.or(file.precision).unwrap_or(DEFAULT_PRECISION),
    };
    let params = match cli.command {
        Command::Envelope(a) => Params::Envelope(a.or(file.envelope).resolve()?),
        Command::Chain(a) => Params::Chain(a.or(file.chain).resolve()?),
        Command::Gate(a) => Params::Gate(a.or(file.gate).resolve()?),
        Command::Spectral(a) => Params::Spectral(a.or(file.spectral).resolve()?),
        Command::Noise(a) => Params::Noise(a.or(file.noise).resolve()?),
        Command::Figures(a) => Params::Figures(a.or(file.figures).resolve()?),
        Command::Rerun { manifest } => {
            let text = std::fs::read_to_string(&manifest).map_err(|source| CliError::Read {
                path: manifest.clone(),
                source,
            })?;
            let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", manifest.display())))?;
            if cli.seed.is_none() && cli.precision.is_none() {
                settings = m.settings;
            }
            Params::from_manifest(&m.command, m.params)?
        }
    };
    execute(&params, &settings, &out_dir)
}

fn execute(params: &Params, settings: &Settings, out_dir: &std::path::Path) -> CliResult<()> {
    params.validate()?;
    let start = Instant::now();
    let (dir, stem) = params.location(out_dir);
    let mut sink = Sink::new(&dir, settings.precision)?;
    let notes = params.run(&mut sink, settings)?;
    output::write_manifest(&mut sink, &stem, params.name(), settings, params, notes, start.elapsed())?;
    for f in sink.written() {
        println!("{}", sink.dir().join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("run with --help for usage");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
