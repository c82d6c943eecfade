//! Spectral refocusing with tilted plane waves.
//!
//! Each beam is a plane wave whose axial wavevector `k_x^j = k sin θ_j` is set
//! by its tilt. On ion positions `x_n` the beams form `M_nj = exp(i k_x^j x_n)`,
//! and the amplitudes that address target `i` solve `Σ_j M_nj f_ji = δ_ni`.
//! Positions and wavevectors may be in any consistent length unit.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::envelope::{solve_envelope_exact, AddressingMatrix};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Angles above this are outside the small-angle regime.
pub const SMALL_ANGLE_LIMIT: f64 = 0.2;

/// Axial wavevectors of the plane-wave components and the optical wavevector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveSet {
    pub wavevectors: Vec<f64>,
    pub optical_wavevector: f64,
}

impl PlaneWaveSet {
    pub fn new(wavevectors: Vec<f64>, optical_wavevector: f64) -> Result<Self> {
        if !(optical_wavevector > 0.0 && optical_wavevector.is_finite()) {
            return Err(Error::invalid(
                "optical_wavevector",
                format!("must be positive, got {optical_wavevector}"),
            ));
        }
        if wavevectors.is_empty() {
            return Err(Error::invalid("wavevectors", "at least one plane wave is required"));
        }
        if let Some(kx) = wavevectors.iter().find(|kx| !(kx.abs() <= optical_wavevector)) {
            return Err(Error::invalid(
                "wavevectors",
                format!("|k_x| = {} exceeds the optical wavevector {optical_wavevector}", kx.abs()),
            ));
        }
        let mut sorted = wavevectors.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[1] == w[0]) {
            return Err(Error::invalid("wavevectors", "duplicate wavevector (singular matrix)"));
        }
        Ok(PlaneWaveSet {
            wavevectors,
            optical_wavevector,
        })
    }

    /// `n` wavevectors `k_m = 2π(m − (n−1)/2)/(n a)`, the discrete Brillouin
    /// zone of a chain with spacing `a` centred on zero.
    pub fn brillouin_grid(n: usize, spacing: f64, optical_wavevector: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "at least one plane wave is required"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid("spacing", format!("must be positive, got {spacing}")));
        }
        let center = (n as f64 - 1.0) / 2.0;
        let ks = (0..n)
            .map(|m| 2.0 * PI * (m as f64 - center) / (n as f64 * spacing))
            .collect();
        Self::new(ks, optical_wavevector)
    }

    pub fn len(&self) -> usize {
        self.wavevectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavevectors.is_empty()
    }

    /// `θ_j = arcsin(k_x^j / k)`.
    pub fn tilt_angles(&self) -> Vec<f64> {
        self.wavevectors
            .iter()
            .map(|kx| (kx / self.optical_wavevector).asin())
            .collect()
    }
}

/// `M_nj = exp(i k_x^j x_n)`.
pub fn plane_wave_matrix(positions: &[f64], waves: &PlaneWaveSet) -> Result<AddressingMatrix> {
    if positions.len() != waves.len() {
        return Err(Error::DimensionMismatch {
            expected: positions.len(),
            found: waves.len(),
        });
    }
    if positions.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("positions", "non-finite coordinate"));
    }
    let entries = CMatrix::from_fn(positions.len(), waves.len(), |n, j| {
        Complex64::from_polar(1.0, waves.wavevectors[j] * positions[n])
    });
    let spacing = positions
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(f64::INFINITY, f64::min);
    let spacing = if spacing.is_finite() { spacing } else { 1.0 };
    AddressingMatrix::from_entries(entries, positions.to_vec(), waves.wavevectors.clone(), spacing)
}

/// Plane-wave amplitudes that address one target ion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralAmplitudes {
    pub target: usize,
    pub amplitudes: Vec<Complex64>,
    pub condition_estimate: f64,
    pub residual_max: f64,
}

/// Solves `Σ_j M_nj f_ji = δ_ni` for `target = i`.
pub fn solve_spectral_amplitudes(m: &AddressingMatrix, target: usize) -> Result<SpectralAmplitudes> {
    let sol = solve_envelope_exact(m, target)?;
    Ok(SpectralAmplitudes {
        target,
        amplitudes: sol.amplitudes,
        condition_estimate: sol.condition_estimate.unwrap_or(f64::NAN),
        residual_max: sol.residual_max.unwrap_or(f64::NAN),
    })
}

/// `G(x) = Σ_j f_j exp(i k_x^j x)` on `grid`.
pub fn spectral_profile(amplitudes: &SpectralAmplitudes, waves: &PlaneWaveSet, grid: &[f64]) -> Result<Vec<Complex64>> {
    if amplitudes.amplitudes.len() != waves.len() {
        return Err(Error::DimensionMismatch {
            expected: waves.len(),
            found: amplitudes.amplitudes.len(),
        });
    }
    Ok(grid
        .iter()
        .map(|&x| {
            amplitudes
                .amplitudes
                .iter()
                .zip(&waves.wavevectors)
                .map(|(f, k)| f * Complex64::from_polar(1.0, k * x))
                .sum()
        })
        .collect())
}

/// Half-width of the tilt window needed to span the Brillouin zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltWindow {
    /// `π/(k a)` in radians.
    pub theta_max: f64,
    /// False when `theta_max` exceeds [`SMALL_ANGLE_LIMIT`].
    pub small_angle: bool,
}

pub fn max_tilt_angle(optical_wavevector: f64, min_spacing: f64) -> Result<TiltWindow> {
    if !(optical_wavevector > 0.0 && optical_wavevector.is_finite()) {
        return Err(Error::invalid(
            "optical_wavevector",
            format!("must be positive, got {optical_wavevector}"),
        ));
    }
    if !(min_spacing > 0.0 && min_spacing.is_finite()) {
        return Err(Error::invalid("min_spacing", format!("must be positive, got {min_spacing}")));
    }
    let theta_max = PI / (optical_wavevector * min_spacing);
    Ok(TiltWindow {
        theta_max,
        small_angle: theta_max <= SMALL_ANGLE_LIMIT,
    })
}
