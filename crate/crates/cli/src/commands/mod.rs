pub mod chain;
pub mod envelope;
pub mod figures;
pub mod gate;
pub mod noise;
pub mod spectral;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::output::{self, Sink};

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Params {
    Envelope(envelope::EnvelopeParams),
    Chain(chain::ChainParams),
    Gate(gate::GateParams),
    Spectral(spectral::SpectralParams),
    Noise(noise::NoiseParams),
    Figures(figures::FiguresParams),
}

impl Params {
    pub fn name(&self) -> &'static str {
        match self {
            Params::Envelope(_) => "envelope",
            Params::Chain(_) => "chain",
            Params::Gate(_) => "gate",
            Params::Spectral(_) => "spectral",
            Params::Noise(_) => "noise",
            Params::Figures(_) => "figures",
        }
    }

    pub fn from_manifest(command: &str, value: serde_json::Value) -> CliResult<Self> {
        let bad = |e: serde_json::Error| CliError::Config(format!("manifest parameters for `{command}`: {e}"));
        Ok(match command {
            "envelope" => Params::Envelope(serde_json::from_value(value).map_err(bad)?),
            "chain" => Params::Chain(serde_json::from_value(value).map_err(bad)?),
            "gate" => Params::Gate(serde_json::from_value(value).map_err(bad)?),
            "spectral" => Params::Spectral(serde_json::from_value(value).map_err(bad)?),
            "noise" => Params::Noise(serde_json::from_value(value).map_err(bad)?),
            "figures" => Params::Figures(serde_json::from_value(value).map_err(bad)?),
            other => return Err(CliError::Config(format!("unknown command `{other}` in manifest"))),
        })
    }

    pub fn validate(&self) -> CliResult<()> {
        match self {
            Params::Envelope(p) => p.validate(),
            Params::Chain(p) => p.validate(),
            Params::Gate(p) => p.validate(),
            Params::Spectral(p) => p.validate(),
            Params::Noise(p) => p.validate(),
            Params::Figures(p) => p.validate(),
        }
    }

    /// Output directory and manifest stem.
    pub fn location(&self, out_dir: &Path) -> (PathBuf, String) {
        let out = match self {
            Params::Envelope(p) => &p.out,
            Params::Chain(p) => &p.out,
            Params::Gate(p) => &p.out,
            Params::Spectral(p) => &p.out,
            Params::Noise(p) => &p.out,
            Params::Figures(p) => return (out_dir.to_path_buf(), format!("figures_{}", p.stem())),
        };
        let path = out_dir.join(out);
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| out_dir.to_path_buf());
        (dir, output::stem(out))
    }

    pub fn run(&self, sink: &mut Sink, settings: &Settings) -> CliResult<Vec<String>> {
        match self {
            Params::Envelope(p) => p.run(sink),
            Params::Chain(p) => p.run(sink),
            Params::Gate(p) => p.run(sink),
            Params::Spectral(p) => p.run(sink),
            Params::Noise(p) => p.run(sink, settings),
            Params::Figures(p) => p.run(sink, settings),
        }
    }
}

/// File name of `out` inside its directory.
pub fn file_name(out: &str) -> String {
    Path::new(out)
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| out.to_string())
}

/// `<stem>.json` next to `out`.
pub fn sidecar(out: &str) -> String {
    format!("{}.json", output::stem(out))
}

pub fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {v}")))
    }
}

pub fn non_negative(name: &str, v: f64) -> CliResult<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be non-negative, got {v}")))
    }
}
