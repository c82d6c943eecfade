use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use refocus_core::gate::DEFAULT_ETA_COM;
use refocus_core::ionchain::{
    axial_mode_spectrum, chain_geometry, default_ion_mass, transverse_mode_spectrum, TrapConfig, ATOMIC_MASS_UNIT,
    LAMB_DICKE_LIMIT,
};

use super::{file_name, positive};
use crate::config::merge_options;
use crate::error::{require, CliError, CliResult};
use crate::output::Sink;

#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainArgs {
    /// Number of ions.
    #[arg(long)]
    pub ions: Option<usize>,
    /// Axial trap frequency in Hz.
    #[arg(long)]
    pub omega_z: Option<f64>,
    /// Transverse to axial frequency ratio.
    #[arg(long)]
    pub anisotropy: Option<f64>,
    /// Ion mass in atomic mass units.
    #[arg(long)]
    pub mass: Option<f64>,
    /// Lamb-Dicke parameter of the centre-of-mass transverse mode.
    #[arg(long)]
    pub eta_com: Option<f64>,
    /// Output JSON (default chain.json).
    #[arg(long)]
    pub out: Option<String>,
}

merge_options!(ChainArgs { ions, omega_z, anisotropy, mass, eta_com, out });

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainParams {
    pub ions: usize,
    pub omega_z_hz: f64,
    pub anisotropy: f64,
    pub mass_amu: f64,
    pub eta_com: f64,
    pub out: String,
}

impl ChainArgs {
    pub fn resolve(self) -> CliResult<ChainParams> {
        Ok(ChainParams {
            ions: require(self.ions, "--ions")?,
            omega_z_hz: self.omega_z.unwrap_or(1.0e6),
            anisotropy: self.anisotropy.unwrap_or(10.0),
            mass_amu: self.mass.unwrap_or(default_ion_mass() / ATOMIC_MASS_UNIT),
            eta_com: self.eta_com.unwrap_or(DEFAULT_ETA_COM),
            out: self.out.unwrap_or_else(|| "chain.json".into()),
        })
    }
}

#[derive(Serialize)]
struct ChainReport {
    positions_um: Vec<f64>,
    spacings_um: Vec<f64>,
    length_scale_um: f64,
    mode_freqs_over_omega_z: Vec<f64>,
    axial_mode_freqs_over_omega_z: Vec<f64>,
    lamb_dicke: Vec<f64>,
    /// Modes whose Lamb-Dicke parameter exceeds the validity limit.
    lamb_dicke_flagged: Vec<usize>,
    equilibrium_residual: f64,
}

impl ChainParams {
    pub fn validate(&self) -> CliResult<()> {
        if self.ions == 0 {
            return Err(CliError::Usage("--ions must be at least 1".into()));
        }
        positive("omega-z", self.omega_z_hz)?;
        positive("anisotropy", self.anisotropy)?;
        positive("mass", self.mass_amu)?;
        positive("eta-com", self.eta_com)
    }

    pub fn trap(&self) -> CliResult<TrapConfig> {
        Ok(TrapConfig::new(self.ions, 2.0 * PI * self.omega_z_hz, self.anisotropy)?.with_mass_amu(self.mass_amu)?)
    }

    pub fn run(&self, sink: &mut Sink) -> CliResult<Vec<String>> {
        let trap = self.trap()?;
        let geometry = chain_geometry(&trap)?;
        let transverse = transverse_mode_spectrum(&geometry, &trap)?;
        let axial = axial_mode_spectrum(&geometry, &trap)?;
        let lamb_dicke = transverse.lamb_dicke_scaled(self.eta_com);
        let report = ChainReport {
            positions_um: geometry.positions.iter().map(|x| x * 1e6).collect(),
            spacings_um: geometry.spacings().iter().map(|x| x * 1e6).collect(),
            length_scale_um: geometry.length_scale * 1e6,
            mode_freqs_over_omega_z: transverse.frequencies_over_omega_z(),
            axial_mode_freqs_over_omega_z: axial.frequencies_over_omega_z(),
            lamb_dicke_flagged: (0..lamb_dicke.len()).filter(|&k| lamb_dicke[k] > LAMB_DICKE_LIMIT).collect(),
            lamb_dicke,
            equilibrium_residual: geometry.residual,
        };
        sink.json(&file_name(&self.out), &report)?;
        Ok(vec!["transverse modes sorted by descending frequency; mode 0 is the centre-of-mass mode".into()])
    }
}
