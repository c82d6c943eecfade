//! Robustness of refocused profiles to beam errors and ion motion.
//!
//! Each active beam amplitude is perturbed as `f_j (1 + r_j) e^{iφ_j}` with
//! `r_j ~ N(0, Δr²)` and `φ_j ~ N(0, Δφ²)`. The damage is measured by the mean
//! absolute intensity change over the ion sites.
//!
//! Sample `s` draws its normals from ChaCha8 seeded with `seed` on stream `s`,
//! so every sample is reproducible on its own and independent of threading.
//! The same standard normals are reused for every grid cell, scaled by that
//! cell's `(Δr, Δφ)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelope::{AddressingMatrix, EnvelopeSolution};
use crate::error::{Error, Result};
use crate::gate::GateSetup;
use crate::ionchain::{
    axial_mode_spectrum, bose_occupation, chain_geometry, doppler_temperature, TrapConfig, DOPPLER_LINEWIDTH, HBAR,
};

pub const DEFAULT_SAMPLES: usize = 5000;
pub const DEFAULT_CELLS: usize = 21;
pub const DEFAULT_AMPLITUDE_MAX: f64 = 0.1;
pub const DEFAULT_PHASE_MAX: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamErrorModel {
    /// Standard deviation `Δr` of the relative amplitude error.
    pub amplitude_std: f64,
    /// Standard deviation `Δφ` of the phase error in radians.
    pub phase_std: f64,
    pub samples: usize,
    pub seed: u64,
}

impl BeamErrorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude_std >= 0.0 && self.amplitude_std.is_finite()) {
            return Err(Error::invalid("amplitude_std", format!("must be non-negative, got {}", self.amplitude_std)));
        }
        if !(self.phase_std >= 0.0 && self.phase_std.is_finite()) {
            return Err(Error::invalid("phase_std", format!("must be non-negative, got {}", self.phase_std)));
        }
        if self.samples == 0 {
            return Err(Error::invalid("samples", "at least one sample is required"));
        }
        Ok(())
    }
}

/// Running mean and variance that can be merged.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n as f64;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n as f64;
        self.count = n;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn standard_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Multiplies every active amplitude by `(1 + r_j) e^{iφ_j}`; `r` and `phi`
/// follow the order of `f.active`.
pub fn perturb_envelope(f: &EnvelopeSolution, r: &[f64], phi: &[f64]) -> Result<EnvelopeSolution> {
    for len in [r.len(), phi.len()] {
        if len != f.active.len() {
            return Err(Error::DimensionMismatch {
                expected: f.active.len(),
                found: len,
            });
        }
    }
    let mut out = f.clone();
    for (k, &j) in f.active.iter().enumerate() {
        out.amplitudes[j] *= Complex64::from_polar(1.0 + r[k], phi[k]);
    }
    Ok(out)
}

/// `(1/N) Σ_n | |G̃(x_n)|² − |G(x_n)|² |`.
pub fn intensity_error(ideal: &[Complex64], actual: &[Complex64]) -> Result<f64> {
    if ideal.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            expected: ideal.len(),
            found: actual.len(),
        });
    }
    if ideal.is_empty() {
        return Err(Error::invalid("sites", "at least one site is required"));
    }
    let total: f64 = ideal
        .iter()
        .zip(actual)
        .map(|(g, h)| (h.norm_sqr() - g.norm_sqr()).abs())
        .sum();
    Ok(total / ideal.len() as f64)
}

/// Mean intensity error over a `(Δr, Δφ)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseGrid {
    pub amplitude_axis: Vec<f64>,
    pub phase_axis: Vec<f64>,
    /// `mean[a][p]` for `amplitude_axis[a]`, `phase_axis[p]`.
    pub mean: Vec<Vec<f64>>,
    pub standard_error: Vec<Vec<f64>>,
    pub samples: usize,
    pub seed: u64,
}

impl NoiseGrid {
    pub fn cell(&self, a: usize, p: usize) -> (f64, f64) {
        (self.mean[a][p], self.standard_error[a][p])
    }
}

/// `n` evenly spaced values over `[0, max]`.
pub fn axis(max: f64, n: usize) -> Result<Vec<f64>> {
    if !(max >= 0.0 && max.is_finite()) {
        return Err(Error::invalid("axis", format!("maximum must be non-negative, got {max}")));
    }
    match n {
        0 => Err(Error::invalid("cells", "at least one cell is required")),
        1 => Ok(vec![0.0]),
        _ => Ok((0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()),
    }
}

fn sample_normals(seed: u64, sample: usize, beams: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample as u64);
    let r = (0..beams).map(|_| rng.sample(StandardNormal)).collect();
    let p = (0..beams).map(|_| rng.sample(StandardNormal)).collect();
    (r, p)
}

fn check_axes(values: &[f64], name: &'static str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(name, "at least one value is required"));
    }
    if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::invalid(name, "standard deviations must be non-negative"));
    }
    Ok(())
}

/// Monte Carlo estimate of the mean intensity error for every cell.
///
/// `m` is the matrix `f` was solved against; the profile is evaluated on its
/// sites.
pub fn monte_carlo_grid(
    m: &AddressingMatrix,
    f: &EnvelopeSolution,
    amplitude_axis: &[f64],
    phase_axis: &[f64],
    samples: usize,
    seed: u64,
) -> Result<NoiseGrid> {
    check_axes(amplitude_axis, "amplitude_axis")?;
    check_axes(phase_axis, "phase_axis")?;
    if samples == 0 {
        return Err(Error::invalid("samples", "at least one sample is required"));
    }
    if f.len() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.ncols(),
            found: f.len(),
        });
    }
    let ideal = m.apply(&f.amplitudes);
    let beams = f.active.len();
    let cells = amplitude_axis.len() * phase_axis.len();

    let per_sample: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let (zr, zp) = sample_normals(seed, s, beams);
            let mut out = Vec::with_capacity(cells);
            let mut r = vec![0.0; beams];
            let mut p = vec![0.0; beams];
            for &dr in amplitude_axis {
                for &dp in phase_axis {
                    for b in 0..beams {
                        r[b] = dr * zr[b];
                        p[b] = dp * zp[b];
                    }
                    let g = m.apply(&perturb_envelope(f, &r, &p)?.amplitudes);
                    out.push(intensity_error(&ideal, &g)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut acc = vec![Welford::default(); cells];
    for row in &per_sample {
        for (a, x) in acc.iter_mut().zip(row) {
            a.push(*x);
        }
    }
    let np = phase_axis.len();
    let grid = |get: fn(&Welford) -> f64| -> Vec<Vec<f64>> {
        (0..amplitude_axis.len())
            .map(|a| (0..np).map(|p| get(&acc[a * np + p])).collect())
            .collect()
    };
    Ok(NoiseGrid {
        amplitude_axis: amplitude_axis.to_vec(),
        phase_axis: phase_axis.to_vec(),
        mean: grid(|w| w.mean),
        standard_error: grid(|w| w.standard_error()),
        samples,
        seed,
    })
}

/// Single-cell estimate for one error model.
pub fn mean_intensity_error(m: &AddressingMatrix, f: &EnvelopeSolution, model: &BeamErrorModel) -> Result<(f64, f64)> {
    model.validate()?;
    let g = monte_carlo_grid(m, f, &[model.amplitude_std], &[model.phase_std], model.samples, model.seed)?;
    Ok(g.cell(0, 0))
}

/// Axial position spread of every ion at the Doppler limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionFluctuation {
    /// Standard deviation `σ_i` in metres.
    pub sigma: Vec<f64>,
    /// Axial mode frequencies in rad/s, descending.
    pub frequencies: Vec<f64>,
    /// Mean occupation of each axial mode.
    pub occupations: Vec<f64>,
    /// `k_B T` in joules.
    pub thermal_energy: f64,
}

impl PositionFluctuation {
    /// Occupation of the centre-of-mass mode (lowest axial frequency).
    pub fn com_occupation(&self) -> f64 {
        self.occupations[self.occupations.len() - 1]
    }
}

/// `σ_i² = Σ_k (b_i^k)² (ħ/2Mω_k)(2n̄_k + 1)` with Bose occupations at
/// `k_B T = ħΓ/2`.
pub fn thermal_position_std(trap: &TrapConfig, linewidth: f64) -> Result<PositionFluctuation> {
    if !(linewidth > 0.0 && linewidth.is_finite()) {
        return Err(Error::invalid("linewidth", format!("must be positive, got {linewidth}")));
    }
    let geometry = chain_geometry(trap)?;
    let modes = axial_mode_spectrum(&geometry, trap)?;
    if let Some(w) = modes.frequencies.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::invalid("axial modes", format!("non-positive mode frequency {w}")));
    }
    let kt = doppler_temperature(linewidth);
    let occupations: Vec<f64> = modes.frequencies.iter().map(|&w| bose_occupation(w, kt)).collect();
    let sigma = (0..trap.ion_count)
        .map(|i| {
            modes
                .frequencies
                .iter()
                .zip(&occupations)
                .enumerate()
                .map(|(k, (&w, &n))| modes.component(i, k).powi(2) * HBAR / (2.0 * trap.ion_mass * w) * (2.0 * n + 1.0))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    Ok(PositionFluctuation {
        sigma,
        frequencies: modes.frequencies,
        occupations,
        thermal_energy: kt,
    })
}

/// Position spread at the default Doppler linewidth.
pub fn doppler_position_std(trap: &TrapConfig) -> Result<PositionFluctuation> {
    thermal_position_std(trap, DOPPLER_LINEWIDTH)
}

/// Gate infidelity with noisy beams at fixed detuning and drive amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyGate {
    pub ideal_infidelity: f64,
    pub mean_infidelity: f64,
    pub infidelity_standard_error: f64,
    /// Intensity error averaged over both target profiles and all samples.
    pub mean_intensity_error: f64,
}

/// Feeds perturbed envelopes of both targets into the gate model.
pub fn gate_under_noise(
    setup: &GateSetup,
    mu: f64,
    rabi: (f64, f64),
    model: &BeamErrorModel,
) -> Result<NoisyGate> {
    model.validate()?;
    let counts = [setup.profiles[0].beam_ions.len(), setup.profiles[1].beam_ions.len()];
    let ideal = setup.model(mu).infidelity(rabi.0, rabi.1);
    let results: Vec<(f64, f64)> = (0..model.samples)
        .into_par_iter()
        .map(|s| {
            let (zr, zp) = sample_normals(model.seed, s, counts[0] + counts[1]);
            let factors: Vec<Complex64> = zr
                .iter()
                .zip(&zp)
                .map(|(r, p)| Complex64::from_polar(1.0 + model.amplitude_std * r, model.phase_std * p))
                .collect();
            let (fj, fn_) = factors.split_at(counts[0]);
            let noisy = setup.with_beam_errors([fj, fn_])?;
            let eps = (intensity_error(&setup.profiles[0].at_ions, &noisy.profiles[0].at_ions)?
                + intensity_error(&setup.profiles[1].at_ions, &noisy.profiles[1].at_ions)?)
                / 2.0;
            Ok((noisy.model(mu).infidelity(rabi.0, rabi.1), eps))
        })
        .collect::<Result<_>>()?;
    let mut infid = Welford::default();
    let mut eps = Welford::default();
    for (d, e) in results {
        infid.push(d);
        eps.push(e);
    }
    Ok(NoisyGate {
        ideal_infidelity: ideal,
        mean_infidelity: infid.mean,
        infidelity_standard_error: infid.standard_error(),
        mean_intensity_error: eps.mean,
    })
}
