use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::commands::{chain::ChainArgs, envelope::EnvelopeArgs, figures::FiguresArgs, gate::GateArgs, noise::NoiseArgs, spectral::SpectralArgs};
use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_PRECISION: usize = 12;

/// Run-wide settings recorded in every manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub seed: u64,
    /// Digits after the decimal point in CSV output.
    pub precision: usize,
}

/// Optional defaults read from a TOML file; command-line flags win.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub precision: Option<usize>,
    pub envelope: Option<EnvelopeArgs>,
    pub chain: Option<ChainArgs>,
    pub gate: Option<GateArgs>,
    pub spectral: Option<SpectralArgs>,
    pub noise: Option<NoiseArgs>,
    pub figures: Option<FiguresArgs>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Field-wise `Option::or` for argument structs.
macro_rules! merge_options {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl $ty {
            pub fn or(self, fallback: Option<Self>) -> Self {
                match fallback {
                    None => self,
                    Some(f) => Self { $($field: self.$field.or(f.$field)),* },
                }
            }
        }
    };
}
pub(crate) use merge_options;
