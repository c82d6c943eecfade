use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use refocus_core::ionchain::{chain_geometry, TrapConfig};
use refocus_core::spectral::{
    max_tilt_angle, plane_wave_matrix, solve_spectral_amplitudes, spectral_profile, PlaneWaveSet,
};

use super::{file_name, positive, sidecar};
use crate::config::merge_options;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Sink};

#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralArgs {
    /// Number of ions.
    #[arg(long)]
    pub ions: Option<usize>,
    /// Target ion, zero-based (default: centre).
    #[arg(long)]
    pub target: Option<usize>,
    /// Samples of the intensity profile across the chain.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Optical wavelength in micrometres.
    #[arg(long)]
    pub wavelength_um: Option<f64>,
    /// Axial trap frequency in Hz.
    #[arg(long)]
    pub omega_z: Option<f64>,
    /// Output CSV (default spectral.csv).
    #[arg(long)]
    pub out: Option<String>,
}

merge_options!(SpectralArgs { ions, target, grid_points, wavelength_um, omega_z, out });

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralParams {
    pub ions: usize,
    pub target: usize,
    pub grid_points: usize,
    pub wavelength_um: f64,
    pub omega_z_hz: f64,
    pub out: String,
}

impl SpectralArgs {
    pub fn resolve(self) -> CliResult<SpectralParams> {
        let ions = self.ions.unwrap_or(21);
        Ok(SpectralParams {
            ions,
            target: self.target.unwrap_or(ions.saturating_sub(1) / 2),
            grid_points: self.grid_points.unwrap_or(2001),
            wavelength_um: self.wavelength_um.unwrap_or(0.4),
            omega_z_hz: self.omega_z.unwrap_or(1.0e6),
            out: self.out.unwrap_or_else(|| "spectral.csv".into()),
        })
    }
}

#[derive(Serialize)]
struct Wave {
    kx_per_um: f64,
    re_f: f64,
    im_f: f64,
    theta_rad: f64,
}

#[derive(Serialize)]
struct SpectralReport {
    target: usize,
    length_scale_um: f64,
    theta_max_rad: f64,
    small_angle: bool,
    residual_max: f64,
    condition_estimate: f64,
    waves: Vec<Wave>,
}

impl SpectralParams {
    pub fn validate(&self) -> CliResult<()> {
        if self.ions < 2 {
            return Err(CliError::Usage(format!("--ions must be at least 2, got {}", self.ions)));
        }
        if self.target >= self.ions {
            return Err(CliError::Usage(format!("--target {} is outside 0..{}", self.target, self.ions)));
        }
        if self.grid_points < 2 {
            return Err(CliError::Usage("--grid-points must be at least 2".into()));
        }
        positive("wavelength-um", self.wavelength_um)?;
        positive("omega-z", self.omega_z_hz)
    }

    pub fn run(&self, sink: &mut Sink) -> CliResult<Vec<String>> {
        let trap = TrapConfig::new(self.ions, 2.0 * PI * self.omega_z_hz, 10.0)?;
        let geometry = chain_geometry(&trap)?;
        let l_um = geometry.length_scale * 1e6;
        let u = &geometry.dimensionless;
        let a_min = u.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        // Work in units of the chain length scale.
        let k = 2.0 * PI / self.wavelength_um * l_um;
        let waves = PlaneWaveSet::brillouin_grid(self.ions, a_min, k)?;
        let m = plane_wave_matrix(u, &waves)?;
        let amps = solve_spectral_amplitudes(&m, self.target)?;
        let (lo, hi) = (u[0], u[u.len() - 1]);
        let grid: Vec<f64> = (0..self.grid_points)
            .map(|i| lo + (hi - lo) * i as f64 / (self.grid_points - 1) as f64)
            .collect();
        let profile = spectral_profile(&amps, &waves, &grid)?;
        let rows = grid.iter().zip(&profile).map(|(x, g)| vec![Cell::from(*x), g.norm_sqr().into()]);
        sink.csv(&file_name(&self.out), &["x_over_l", "intensity"], rows)?;
        let window = max_tilt_angle(k, a_min)?;
        let report = SpectralReport {
            target: self.target,
            length_scale_um: l_um,
            theta_max_rad: window.theta_max,
            small_angle: window.small_angle,
            residual_max: amps.residual_max,
            condition_estimate: amps.condition_estimate,
            waves: waves
                .wavevectors
                .iter()
                .zip(&amps.amplitudes)
                .zip(waves.tilt_angles())
                .map(|((kx, f), theta)| Wave {
                    kx_per_um: kx / l_um,
                    re_f: f.re,
                    im_f: f.im,
                    theta_rad: theta,
                })
                .collect(),
        };
        sink.json(&sidecar(&self.out), &report)?;
        Ok(vec![
            "plane-wave axial wavevectors form the discrete Brillouin zone of the smallest ion spacing".into(),
            "target index is zero-based".into(),
        ])
    }
}
