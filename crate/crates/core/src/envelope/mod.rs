//! Correction-beam envelopes for spatial refocusing.
//!
//! A target qubit is addressed by a superposition of identical beams centered
//! on nearby sites. With single-beam profile `g` and per-beam amplitudes `f`,
//! the effective profile is `G(x) = Σ_j f_j g(x − c_j)`; the envelope is chosen
//! so that `G` is a Kronecker delta on the qubit sites.
//!
//! Two solvers are provided: [`solve_envelope_exact`] solves the finite open
//! chain directly, and [`solve_envelope_fourier`] inverts the lattice spectrum
//! of the profile under periodic boundary conditions.

mod theta;
mod toeplitz;

pub use theta::{
    f0_large_waist, f0_small_waist, gaussian_gamma, gaussian_spectrum, lattice_gaussian_spectrum,
    theta3_order,
};
pub use toeplitz::{
    dominant_negative_root, fit_decay_constant, toeplitz_polynomial_coefficients,
    toeplitz_polynomial_reduced, toeplitz_polynomial_roots, DecayFit,
};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Sites of a one-dimensional qubit array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitLattice {
    positions: Vec<f64>,
    spacing: f64,
}

impl QubitLattice {
    /// `positions` must be finite and strictly increasing, with at least two
    /// sites. `spacing` is the reference spacing `a` used for ratios such as
    /// `w/a`.
    pub fn new(positions: Vec<f64>, spacing: f64) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::invalid("positions", "at least two sites are required"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid("spacing", format!("must be positive, got {spacing}")));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("positions", "non-finite coordinate"));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("positions", "must be strictly increasing"));
        }
        Ok(QubitLattice { positions, spacing })
    }

    /// `n` sites at `0, a, 2a, …`.
    pub fn homogeneous(n: usize, spacing: f64) -> Result<Self> {
        Self::new((0..n).map(|i| i as f64 * spacing).collect(), spacing)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Index of the site closest to the middle of the array.
    pub fn center_index(&self) -> usize {
        (self.len() - 1) / 2
    }
}

/// Single-beam amplitude profile `g(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BeamProfile {
    /// `exp(−x²/w²)`.
    Gaussian { width: f64 },
    /// `exp(−α|x|)`.
    Exponential { decay: f64 },
    /// `exp(i k_x x)`.
    PlaneWave { wavevector: f64 },
}

impl BeamProfile {
    pub fn gaussian(width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::invalid("width", format!("must be positive, got {width}")));
        }
        Ok(BeamProfile::Gaussian { width })
    }

    pub fn exponential(decay: f64) -> Result<Self> {
        if !(decay > 0.0 && decay.is_finite()) {
            return Err(Error::invalid("decay", format!("must be positive, got {decay}")));
        }
        Ok(BeamProfile::Exponential { decay })
    }

    pub fn plane_wave(wavevector: f64) -> Result<Self> {
        if !wavevector.is_finite() {
            return Err(Error::invalid("wavevector", "must be finite"));
        }
        Ok(BeamProfile::PlaneWave { wavevector })
    }

    /// Exponential beam whose amplitude one spacing away is `lambda`.
    pub fn exponential_with_residue(lambda: f64, spacing: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::invalid("lambda", format!("must lie in (0, 1), got {lambda}")));
        }
        Self::exponential(-lambda.ln() / spacing)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match *self {
            BeamProfile::Gaussian { width } => Complex64::new((-(x / width).powi(2)).exp(), 0.0),
            BeamProfile::Exponential { decay } => Complex64::new((-decay * x.abs()).exp(), 0.0),
            BeamProfile::PlaneWave { wavevector } => Complex64::from_polar(1.0, wavevector * x),
        }
    }

    /// Amplitude one lattice spacing away from the center: `γ = e^{−a²/w²}`
    /// for a Gaussian and `λ = e^{−αa}` for an exponential beam.
    pub fn neighbor_residue(&self, spacing: f64) -> Option<f64> {
        match *self {
            BeamProfile::Gaussian { width } => Some(gaussian_gamma(width / spacing)),
            BeamProfile::Exponential { decay } => Some((-decay * spacing).exp()),
            BeamProfile::PlaneWave { .. } => None,
        }
    }

    /// Discrete lattice transform `Σ_n g(na) e^{−ikn}`.
    pub fn lattice_spectrum(&self, k: f64, spacing: f64) -> Result<f64> {
        match *self {
            BeamProfile::Gaussian { width } => {
                Ok(lattice_gaussian_spectrum(k, gaussian_gamma(width / spacing)))
            }
            BeamProfile::Exponential { decay } => {
                let l = (-decay * spacing).exp();
                Ok((1.0 - l * l) / (1.0 - 2.0 * l * k.cos() + l * l))
            }
            BeamProfile::PlaneWave { .. } => Err(Error::invalid(
                "beam",
                "the Fourier solver needs a localized (gaussian or exponential) profile",
            )),
        }
    }

    /// Expected number of beams with `|f| > ε`, `2(w/a)² ln(1/ε)`, for a
    /// Gaussian beam.
    pub fn predicted_active_count(&self, spacing: f64, epsilon: f64) -> Option<f64> {
        match *self {
            BeamProfile::Gaussian { width } => {
                Some(2.0 * (width / spacing).powi(2) * (1.0 / epsilon).ln())
            }
            _ => None,
        }
    }
}

/// `M[n][j] = g(x_n − c_j)` for qubit sites `x_n` and beam centers `c_j`.
#[derive(Debug, Clone)]
pub struct AddressingMatrix {
    pub entries: CMatrix,
    pub sites: Vec<f64>,
    pub beam_centers: Vec<f64>,
    pub beam: Option<BeamProfile>,
    pub spacing: f64,
}

impl AddressingMatrix {
    pub fn from_entries(entries: CMatrix, sites: Vec<f64>, beam_centers: Vec<f64>, spacing: f64) -> Result<Self> {
        if entries.nrows() != sites.len() {
            return Err(Error::DimensionMismatch {
                expected: sites.len(),
                found: entries.nrows(),
            });
        }
        if entries.ncols() != beam_centers.len() {
            return Err(Error::DimensionMismatch {
                expected: beam_centers.len(),
                found: entries.ncols(),
            });
        }
        Ok(AddressingMatrix {
            entries,
            sites,
            beam_centers,
            beam: None,
            spacing,
        })
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn get(&self, n: usize, j: usize) -> Complex64 {
        self.entries[(n, j)]
    }

    /// Restriction to the given rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> AddressingMatrix {
        AddressingMatrix {
            entries: CMatrix::from_fn(rows.len(), cols.len(), |r, c| self.entries[(rows[r], cols[c])]),
            sites: rows.iter().map(|&r| self.sites[r]).collect(),
            beam_centers: cols.iter().map(|&c| self.beam_centers[c]).collect(),
            beam: self.beam,
            spacing: self.spacing,
        }
    }

    /// `Σ_j M[n][j] f[j]` for every site `n`.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        (0..self.nrows())
            .map(|n| (0..self.ncols()).map(|j| self.entries[(n, j)] * f[j]).sum())
            .collect()
    }
}

pub fn build_addressing_matrix(
    lattice: &QubitLattice,
    beam: &BeamProfile,
    centers: &[f64],
) -> Result<AddressingMatrix> {
    if centers.is_empty() {
        return Err(Error::invalid("centers", "at least one beam center is required"));
    }
    let sites = lattice.positions();
    let entries = CMatrix::from_fn(sites.len(), centers.len(), |n, j| beam.eval(sites[n] - centers[j]));
    if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite {
            context: "addressing matrix (invalid beam parameter)",
        });
    }
    Ok(AddressingMatrix {
        entries,
        sites: sites.to_vec(),
        beam_centers: centers.to_vec(),
        beam: Some(*beam),
        spacing: lattice.spacing(),
    })
}

/// Beams centered on every site of the lattice.
pub fn build_site_centered_matrix(lattice: &QubitLattice, beam: &BeamProfile) -> Result<AddressingMatrix> {
    build_addressing_matrix(lattice, beam, lattice.positions())
}

/// Correction amplitudes for one target qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSolution {
    pub target: usize,
    pub amplitudes: Vec<Complex64>,
    pub truncation_epsilon: f64,
    pub active: Vec<usize>,
    pub condition_estimate: Option<f64>,
    pub residual_max: Option<f64>,
}

impl EnvelopeSolution {
    /// An untruncated solution with every beam active.
    pub fn untruncated(target: usize, amplitudes: Vec<Complex64>) -> Self {
        let active = (0..amplitudes.len()).collect();
        EnvelopeSolution {
            target,
            amplitudes,
            truncation_epsilon: 0.0,
            active,
            condition_estimate: None,
            residual_max: None,
        }
    }

    /// Unit amplitude on the target beam only.
    pub fn bare(target: usize, len: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[target] = Complex64::new(1.0, 0.0);
        Self::untruncated(target, amplitudes)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Target-beam amplitude `f(0)`, which sets the laser-power overhead.
    pub fn f0(&self) -> Complex64 {
        self.amplitudes[self.target]
    }

    /// Amplitude of the beam `d` sites from the target (negative `d` to the left).
    pub fn at_offset(&self, d: isize) -> Option<Complex64> {
        let j = self.target as isize + d;
        (j >= 0 && (j as usize) < self.len()).then(|| self.amplitudes[j as usize])
    }
}

fn unit_vector(n: usize, target: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    e[target] = Complex64::new(1.0, 0.0);
    e
}

/// Solves `Σ_j M[n][j] f[j] = δ(n, target)` on the open chain.
pub fn solve_envelope_exact(m: &AddressingMatrix, target: usize) -> Result<EnvelopeSolution> {
    solve_envelope_exact_with(m, target, linalg::DEFAULT_MAX_CONDITION)
}

pub fn solve_envelope_exact_with(
    m: &AddressingMatrix,
    target: usize,
    max_condition: f64,
) -> Result<EnvelopeSolution> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if target >= m.nrows() {
        return Err(Error::invalid(
            "target",
            format!("index {target} out of range for {} sites", m.nrows()),
        ));
    }
    let rhs = unit_vector(m.nrows(), target);
    let sol = linalg::solve_checked(&m.entries, &rhs, max_condition)?;
    let residual = linalg::residual_max(&m.entries, &sol.x, &rhs);
    let mut out = EnvelopeSolution::untruncated(target, sol.x);
    out.condition_estimate = Some(sol.condition);
    out.residual_max = Some(residual);
    Ok(out)
}

/// Periodic-chain envelope `f_j = (1/N) Σ_k e^{ik(j−t)} / g(k)` over the
/// discrete Brillouin zone `k = 2πm/N`.
pub fn solve_envelope_fourier(
    beam: &BeamProfile,
    spacing: f64,
    n: usize,
    target: usize,
) -> Result<EnvelopeSolution> {
    if n < 2 {
        return Err(Error::invalid("n", "at least two sites are required"));
    }
    if target >= n {
        return Err(Error::invalid("target", format!("index {target} out of range for {n} sites")));
    }
    let ks: Vec<f64> = (0..n)
        .map(|m| 2.0 * std::f64::consts::PI * m as f64 / n as f64)
        .collect();
    let spectrum = ks
        .iter()
        .map(|&k| beam.lattice_spectrum(k, spacing))
        .collect::<Result<Vec<f64>>>()?;
    let scale = spectrum.iter().map(|g| g.abs()).fold(0.0, f64::max);
    if let Some((m, _)) = spectrum
        .iter()
        .enumerate()
        .find(|(_, g)| g.abs() <= 1e-14 * scale || !g.is_finite())
    {
        return Err(Error::NonInvertibleSpectrum { k: ks[m] });
    }
    let mut buf: Vec<Complex64> = spectrum.iter().map(|g| Complex64::new(1.0 / g, 0.0)).collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let amplitudes = (0..n)
        .map(|j| {
            let d = (j + n - target) % n;
            buf[d] / n as f64
        })
        .collect();
    Ok(EnvelopeSolution::untruncated(target, amplitudes))
}

/// Closed-form exponential-beam envelope `(β₀, β₁)` with
/// `β₀ = (1+λ²)/(1−λ²)` and `β₁ = −λ/(1−λ²)`.
pub fn exponential_toy_envelope(lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid("lambda", format!("must lie in (0, 1), got {lambda}")));
    }
    let d = 1.0 - lambda * lambda;
    Ok(((1.0 + lambda * lambda) / d, -lambda / d))
}

/// Three-beam toy envelope placed on an `n`-site chain.
pub fn exponential_toy_solution(lambda: f64, n: usize, target: usize) -> Result<EnvelopeSolution> {
    if target == 0 || target + 1 >= n {
        return Err(Error::invalid("target", "the toy solution needs an interior target"));
    }
    let (b0, b1) = exponential_toy_envelope(lambda)?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
    amplitudes[target] = Complex64::new(b0, 0.0);
    amplitudes[target - 1] = Complex64::new(b1, 0.0);
    amplitudes[target + 1] = Complex64::new(b1, 0.0);
    let mut sol = EnvelopeSolution::untruncated(target, amplitudes);
    sol.active = vec![target - 1, target, target + 1];
    Ok(sol)
}

/// How [`truncate_envelope`] treats the beams that survive the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationMode {
    /// Zero the small amplitudes and keep the rest unchanged.
    #[default]
    Drop,
    /// Re-solve the square system restricted to the surviving beams.
    Resolve,
}

#[derive(Debug, Clone)]
pub struct TruncatedEnvelope {
    pub solution: EnvelopeSolution,
    /// `2(w/a)² ln(1/ε)` for Gaussian beams.
    pub predicted_active: Option<f64>,
    /// `max_n |Σ_j M[n][j] f̃[j] − δ(n, target)|` over all sites.
    pub residual_max: f64,
    /// `max_{n ≠ target} |G(x_n)|`.
    pub off_target_max: f64,
    /// Set when no amplitude exceeded ε and the bare target beam is used.
    pub bare_fallback: bool,
}

/// Keeps only beams with `|f[j]| > ε`.
///
/// `m` must be the matrix the solution was computed from. When every
/// amplitude falls below `epsilon` the active set is empty and the profile
/// falls back to the uncorrected target beam.
pub fn truncate_envelope(
    m: &AddressingMatrix,
    f: &EnvelopeSolution,
    epsilon: f64,
    mode: TruncationMode,
) -> Result<TruncatedEnvelope> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    if f.len() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.ncols(),
            found: f.len(),
        });
    }
    let active: Vec<usize> = (0..f.len()).filter(|&j| f.amplitudes[j].norm() > epsilon).collect();
    let zero = Complex64::new(0.0, 0.0);
    let bare_fallback = active.is_empty();
    let mut amplitudes = vec![zero; f.len()];
    if bare_fallback {
        amplitudes[f.target] = Complex64::new(1.0, 0.0);
    } else {
        match mode {
            TruncationMode::Drop => {
                for &j in &active {
                    amplitudes[j] = f.amplitudes[j];
                }
            }
            TruncationMode::Resolve => {
                let sub = m.submatrix(&active, &active);
                let local_target = active
                    .iter()
                    .position(|&j| j == f.target)
                    .ok_or_else(|| Error::invalid("epsilon", "truncation removed the target beam"))?;
                let local = solve_envelope_exact(&sub, local_target)?;
                for (k, &j) in active.iter().enumerate() {
                    amplitudes[j] = local.amplitudes[k];
                }
            }
        }
    }
    let applied = m.apply(&amplitudes);
    let rhs = unit_vector(m.nrows(), f.target);
    let residual_max = applied
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let off_target_max = applied
        .iter()
        .enumerate()
        .filter(|(n, _)| *n != f.target)
        .map(|(_, a)| a.norm())
        .fold(0.0, f64::max);
    let predicted_active = m.beam.and_then(|b| b.predicted_active_count(m.spacing, epsilon));
    Ok(TruncatedEnvelope {
        solution: EnvelopeSolution {
            target: f.target,
            amplitudes,
            truncation_epsilon: epsilon,
            active,
            condition_estimate: f.condition_estimate,
            residual_max: Some(residual_max),
        },
        predicted_active,
        residual_max,
        off_target_max,
        bare_fallback,
    })
}

/// Effective profile sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefocusedProfile {
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl RefocusedProfile {
    pub fn intensities(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// `G(x) = Σ_j f[j] g(x − c_j)` on `grid`.
pub fn refocused_profile(
    f: &EnvelopeSolution,
    beam: &BeamProfile,
    centers: &[f64],
    grid: &[f64],
) -> Result<RefocusedProfile> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "at least one sample point is required"));
    }
    if centers.len() != f.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: centers.len(),
        });
    }
    let values = grid
        .iter()
        .map(|&x| {
            f.amplitudes
                .iter()
                .zip(centers)
                .filter(|(a, _)| a.norm() > 0.0)
                .map(|(a, &c)| a * beam.eval(x - c))
                .sum()
        })
        .collect();
    Ok(RefocusedProfile {
        grid: grid.to_vec(),
        values,
    })
}

/// Exact center-target envelope of an `n`-site homogeneous Gaussian chain
/// (unit spacing) with waist ratio `w_over_a`.
pub fn gaussian_chain_envelope(w_over_a: f64, n: usize) -> Result<EnvelopeSolution> {
    let lattice = QubitLattice::homogeneous(n, 1.0)?;
    let beam = BeamProfile::gaussian(w_over_a)?;
    let m = build_site_centered_matrix(&lattice, &beam)?;
    solve_envelope_exact(&m, lattice.center_index())
}
