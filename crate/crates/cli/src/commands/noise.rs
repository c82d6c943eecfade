use serde::{Deserialize, Serialize};

use refocus_core::envelope::{build_site_centered_matrix, solve_envelope_exact, BeamProfile, QubitLattice};
use refocus_core::ionchain::{equilibrium_positions, TrapConfig, REFERENCE_OMEGA_Z};
use refocus_core::noise::{
    axis, doppler_position_std, monte_carlo_grid, NoiseGrid, DEFAULT_AMPLITUDE_MAX, DEFAULT_CELLS, DEFAULT_PHASE_MAX,
    DEFAULT_SAMPLES,
};

use super::{file_name, non_negative, positive};
use crate::config::{merge_options, Settings};
use crate::error::{CliError, CliResult};
use crate::output::{self, Cell, Sink};

#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseArgs {
    /// Largest relative amplitude error (standard deviation).
    #[arg(long)]
    pub dr_max: Option<f64>,
    /// Largest phase error in radians (standard deviation).
    #[arg(long)]
    pub dphi_max: Option<f64>,
    /// Grid cells along each axis.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Monte Carlo samples per cell.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Number of ions in the harmonic chain.
    #[arg(long)]
    pub ions: Option<usize>,
    /// Target ion, zero-based (default: centre).
    #[arg(long)]
    pub target: Option<usize>,
    /// Also write per-ion thermal position spreads at the Doppler limit.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub thermal: Option<bool>,
    /// Output CSV (default noise.csv).
    #[arg(long)]
    pub out: Option<String>,
}

merge_options!(NoiseArgs { dr_max, dphi_max, cells, samples, ions, target, thermal, out });

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseParams {
    pub dr_max: f64,
    pub dphi_max: f64,
    pub cells: usize,
    pub samples: usize,
    pub ions: usize,
    pub target: usize,
    pub thermal: bool,
    pub out: String,
}

impl NoiseArgs {
    pub fn resolve(self) -> CliResult<NoiseParams> {
        let ions = self.ions.unwrap_or(21);
        Ok(NoiseParams {
            dr_max: self.dr_max.unwrap_or(DEFAULT_AMPLITUDE_MAX),
            dphi_max: self.dphi_max.unwrap_or(DEFAULT_PHASE_MAX),
            cells: self.cells.unwrap_or(DEFAULT_CELLS),
            samples: self.samples.unwrap_or(DEFAULT_SAMPLES),
            ions,
            target: self.target.unwrap_or(ions.saturating_sub(1) / 2),
            thermal: self.thermal.unwrap_or(false),
            out: self.out.unwrap_or_else(|| "noise.csv".into()),
        })
    }
}

#[derive(Serialize)]
struct ThermalReport {
    sigma_nm: Vec<f64>,
    axial_mode_freqs_over_omega_z: Vec<f64>,
    occupations: Vec<f64>,
    com_occupation: f64,
    max_sigma_over_min_spacing: f64,
}

impl NoiseParams {
    pub fn validate(&self) -> CliResult<()> {
        non_negative("dr-max", self.dr_max)?;
        non_negative("dphi-max", self.dphi_max)?;
        if self.cells == 0 || self.samples == 0 {
            return Err(CliError::Usage("--cells and --samples must be at least 1".into()));
        }
        if self.ions < 2 {
            return Err(CliError::Usage(format!("--ions must be at least 2, got {}", self.ions)));
        }
        if self.target >= self.ions {
            return Err(CliError::Usage(format!("--target {} is outside 0..{}", self.target, self.ions)));
        }
        positive("samples", self.samples as f64)
    }

    /// Heatmap for the refocused envelope on the harmonic chain, with the
    /// Gaussian waist equal to the spacing right of the target.
    pub fn grid(&self, seed: u64) -> CliResult<NoiseGrid> {
        let u = equilibrium_positions(self.ions)?.dimensionless;
        let right = (self.target + 1).min(self.ions - 1);
        let waist = u[right] - u[right - 1];
        let lattice = QubitLattice::new(u, waist)?;
        let m = build_site_centered_matrix(&lattice, &BeamProfile::gaussian(waist)?)?;
        let f = solve_envelope_exact(&m, self.target)?;
        Ok(monte_carlo_grid(
            &m,
            &f,
            &axis(self.dr_max, self.cells)?,
            &axis(self.dphi_max, self.cells)?,
            self.samples,
            seed,
        )?)
    }

    pub fn write_grid(&self, sink: &mut Sink, name: &str, grid: &NoiseGrid) -> CliResult<()> {
        let mut rows = Vec::new();
        for (a, dr) in grid.amplitude_axis.iter().enumerate() {
            for (p, dphi) in grid.phase_axis.iter().enumerate() {
                let (mean, se) = grid.cell(a, p);
                rows.push(vec![Cell::from(*dr), (*dphi).into(), mean.into(), se.into()]);
            }
        }
        sink.csv(name, &["dr", "dphi", "mean_intensity_error", "standard_error"], rows)
    }

    pub fn run(&self, sink: &mut Sink, settings: &Settings) -> CliResult<Vec<String>> {
        let grid = self.grid(settings.seed)?;
        self.write_grid(sink, &file_name(&self.out), &grid)?;
        if self.thermal {
            let trap = TrapConfig::new(self.ions, REFERENCE_OMEGA_Z, 10.0)?;
            let fl = doppler_position_std(&trap)?;
            let geometry = refocus_core::ionchain::chain_geometry(&trap)?;
            let sigma_max = fl.sigma.iter().copied().fold(0.0, f64::max);
            let report = ThermalReport {
                sigma_nm: fl.sigma.iter().map(|s| s * 1e9).collect(),
                axial_mode_freqs_over_omega_z: fl.frequencies.iter().map(|w| w / trap.omega_z).collect(),
                com_occupation: fl.com_occupation(),
                occupations: fl.occupations,
                max_sigma_over_min_spacing: sigma_max / geometry.min_spacing(),
            };
            sink.json(&format!("{}_thermal.json", output::stem(&self.out)), &report)?;
        }
        Ok(vec![
            "every active beam, including the target beam, gets an independent amplitude and phase error".into(),
            "sample s draws from stream s of the seeded generator, so results do not depend on thread count".into(),
        ])
    }
}
