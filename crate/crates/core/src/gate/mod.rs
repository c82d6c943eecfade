//! Phonon-mediated conditional phase gate under crosstalk.
//!
//! The spin-dependent force `H = −Σ_{j,k} χ_j(t) g_j^k (a_k† e^{iω_k t} + h.c.) σ_j^z`
//! generates `U(τ) = exp(i Σ_j σ_j^z (Σ_k α_j^k a_k† + h.c.) + i Σ_{j<n} φ_jn σ_j^z σ_n^z)`
//! exactly. Every quantity here is dimensionless: frequencies in units of
//! ω_z, times in units of 1/ω_z and positions in units of the chain length
//! scale.

pub mod fidelity;
pub mod integrals;
pub mod optimize;

pub use fidelity::{gate_fidelity, FidelityBreakdown, FidelityResult};
pub use integrals::{ModeIntegrals, Quadrature};
pub use optimize::{optimize_rabi, scan_detuning, OptimizerBudget, RabiOptimum, ScanPoint};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::envelope::{build_site_centered_matrix, solve_envelope_exact, BeamProfile, QubitLattice};
use crate::error::{Error, Result};
use crate::ionchain::{
    chain_geometry, thermal_occupations, transverse_mode_spectrum, ChainGeometry, TrapConfig, TransverseModes,
};

pub const DEFAULT_ETA_COM: f64 = 0.1;
pub const DEFAULT_TAU_PERIODS: f64 = 180.0;

/// How the two target ions are illuminated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Addressing {
    /// Only the target ions see light.
    Perfect,
    /// Gaussian beams of waist `waist_rel · a_min` on both targets. With
    /// `n_corr > 0`, correction beams sit on the `n_corr` ions nearest the
    /// pair and each target envelope is solved on the full beam set.
    Refocused { waist_rel: f64, n_corr: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    /// Target ions `(j, n)`, zero-based.
    pub pair: (usize, usize),
    /// `μ/ω_z`
    pub detuning: f64,
    /// `τ/τ₀` with `τ₀ = 2π/ω_z`.
    pub tau_periods: f64,
    /// `(Ω_j, Ω_n)` in units of ω_z.
    pub rabi: (f64, f64),
    pub addressing: Addressing,
    /// Lamb–Dicke parameter of the highest transverse mode.
    pub eta_com: f64,
}

impl GateConfig {
    pub fn tau(&self) -> f64 {
        2.0 * PI * self.tau_periods
    }

    pub fn validate(&self, ion_count: usize) -> Result<()> {
        let (j, n) = self.pair;
        if j == n || j >= ion_count || n >= ion_count {
            return Err(Error::invalid(
                "pair",
                format!("need two distinct ions below {ion_count}, got ({j}, {n})"),
            ));
        }
        if !(self.tau_periods > 0.0 && self.tau_periods.is_finite()) {
            return Err(Error::invalid("tau_periods", format!("must be positive, got {}", self.tau_periods)));
        }
        if !(self.detuning.is_finite() && self.detuning > 0.0) {
            return Err(Error::invalid("detuning", format!("must be positive, got {}", self.detuning)));
        }
        if !(self.rabi.0.is_finite() && self.rabi.1.is_finite()) {
            return Err(Error::invalid("rabi", "must be finite"));
        }
        if !(self.eta_com > 0.0 && self.eta_com.is_finite()) {
            return Err(Error::invalid("eta_com", format!("must be positive, got {}", self.eta_com)));
        }
        if let Addressing::Refocused { waist_rel, n_corr } = self.addressing {
            if !(waist_rel > 0.0 && waist_rel.is_finite()) {
                return Err(Error::invalid("waist_rel", format!("must be positive, got {waist_rel}")));
            }
            if n_corr + 2 > ion_count {
                return Err(Error::invalid(
                    "n_corr",
                    format!("{n_corr} correction beams do not fit in {ion_count} ions"),
                ));
            }
        }
        Ok(())
    }
}

/// Effective drive amplitude `Ω_i` seen by every ion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRabiVector {
    pub values: Vec<Complex64>,
}

impl EffectiveRabiVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        EffectiveRabiVector {
            values: self.values.iter().map(|z| z * s).collect(),
        }
    }

    /// Largest `|Ω_i|` outside `pair`.
    pub fn max_spectator(&self, pair: (usize, usize)) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != pair.0 && *i != pair.1)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Refocused profile of one target evaluated at every ion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetProfile {
    pub target: usize,
    /// Ions carrying a beam, ascending.
    pub beam_ions: Vec<usize>,
    /// Amplitude of each beam in `beam_ions`.
    pub amplitudes: Vec<Complex64>,
    /// `G(x_i)` for every ion.
    pub at_ions: Vec<Complex64>,
}

/// The pair plus the `n_corr` non-target ions closest to either target
/// (ties go to the lower index), ascending.
pub fn correction_beam_ions(positions: &[f64], pair: (usize, usize), n_corr: usize) -> Vec<usize> {
    let (j, n) = pair;
    let distance = |i: usize| (positions[i] - positions[j]).abs().min((positions[i] - positions[n]).abs());
    let mut others: Vec<usize> = (0..positions.len()).filter(|&i| i != j && i != n).collect();
    others.sort_by(|&a, &b| distance(a).total_cmp(&distance(b)).then(a.cmp(&b)));
    let mut ions: Vec<usize> = others.into_iter().take(n_corr).collect();
    ions.push(j);
    ions.push(n);
    ions.sort_unstable();
    ions
}

/// Envelope on the beams at `beam_ions` that makes `G` one on `target` and
/// zero on every other beam ion.
pub fn target_profile(positions: &[f64], beam: &BeamProfile, beam_ions: &[usize], target: usize) -> Result<TargetProfile> {
    let local = beam_ions
        .iter()
        .position(|&i| i == target)
        .ok_or_else(|| Error::invalid("target", format!("ion {target} carries no beam")))?;
    if beam_ions.iter().any(|&i| i >= positions.len()) {
        return Err(Error::invalid("beam_ions", "index out of range"));
    }
    let centers: Vec<f64> = beam_ions.iter().map(|&i| positions[i]).collect();
    let amplitudes = if centers.len() == 1 {
        vec![Complex64::new(1.0, 0.0) / beam.eval(0.0)]
    } else {
        let spacing = centers.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let lattice = QubitLattice::new(centers.clone(), spacing)?;
        let m = build_site_centered_matrix(&lattice, beam)?;
        solve_envelope_exact(&m, local)?.amplitudes
    };
    Ok(profile_from(positions, beam, beam_ions.to_vec(), &centers, amplitudes, target))
}

/// A single uncorrected beam on `target`.
pub fn bare_profile(positions: &[f64], beam: &BeamProfile, target: usize) -> TargetProfile {
    let amplitudes = vec![Complex64::new(1.0, 0.0) / beam.eval(0.0)];
    profile_from(positions, beam, vec![target], &[positions[target]], amplitudes, target)
}

fn profile_from(
    positions: &[f64],
    beam: &BeamProfile,
    beam_ions: Vec<usize>,
    centers: &[f64],
    amplitudes: Vec<Complex64>,
    target: usize,
) -> TargetProfile {
    let at_ions = positions
        .iter()
        .map(|&x| amplitudes.iter().zip(centers).map(|(f, &c)| f * beam.eval(x - c)).sum())
        .collect();
    TargetProfile {
        target,
        beam_ions,
        amplitudes,
        at_ions,
    }
}

fn perfect_profile(n: usize, target: usize) -> TargetProfile {
    let mut at_ions = vec![Complex64::new(0.0, 0.0); n];
    at_ions[target] = Complex64::new(1.0, 0.0);
    TargetProfile {
        target,
        beam_ions: vec![target],
        amplitudes: vec![Complex64::new(1.0, 0.0)],
        at_ions,
    }
}

/// `Ω_i = Ω_j G_j(x_i) + Ω_n G_n(x_i)`.
pub fn effective_rabi(profiles: [&TargetProfile; 2], rabi_j: f64, rabi_n: f64) -> Result<EffectiveRabiVector> {
    let [pj, pn] = profiles;
    if pj.at_ions.len() != pn.at_ions.len() {
        return Err(Error::DimensionMismatch {
            expected: pj.at_ions.len(),
            found: pn.at_ions.len(),
        });
    }
    Ok(EffectiveRabiVector {
        values: pj
            .at_ions
            .iter()
            .zip(&pn.at_ions)
            .map(|(a, b)| a * rabi_j + b * rabi_n)
            .collect(),
    })
}

/// Residual displacements and two-spin phases at the end of the gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatePhases {
    /// `α_i^k`, ion by mode.
    pub alpha: DMatrix<Complex64>,
    /// `φ_in`, symmetric with zero diagonal.
    pub phi: DMatrix<f64>,
}

fn check_sizes(n: usize, modes: &TransverseModes, lamb_dicke: &[f64]) -> Result<()> {
    if modes.vectors.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: modes.vectors.nrows(),
        });
    }
    if lamb_dicke.len() != modes.len() {
        return Err(Error::DimensionMismatch {
            expected: modes.len(),
            found: lamb_dicke.len(),
        });
    }
    Ok(())
}

fn mode_integrals(modes: &TransverseModes, mu: f64, tau: f64) -> Vec<ModeIntegrals> {
    modes
        .frequencies_over_omega_z()
        .into_iter()
        .map(|w| ModeIntegrals::new(mu, w, tau))
        .collect()
}

fn displacement_from(rabi: &[Complex64], modes: &TransverseModes, eta: &[f64], ints: &[ModeIntegrals]) -> DMatrix<Complex64> {
    DMatrix::from_fn(rabi.len(), modes.len(), |i, k| {
        ints[k].displacement_for(rabi[i]) * (eta[k] * modes.component(i, k))
    })
}

fn bilinear_phase(a: &[Complex64], b: &[Complex64], modes: &TransverseModes, eta: &[f64], ints: &[ModeIntegrals]) -> DMatrix<f64> {
    let n = a.len();
    let mut phi = DMatrix::zeros(n, n);
    for i in 0..n {
        for m in (i + 1)..n {
            let mut acc = 0.0;
            for (k, int) in ints.iter().enumerate() {
                let g = eta[k] * eta[k] * modes.component(i, k) * modes.component(m, k);
                if g != 0.0 {
                    acc += g * 0.5 * (int.symmetric_phase(a[i], b[m]) + int.symmetric_phase(b[i], a[m]));
                }
            }
            phi[(i, m)] = acc;
            phi[(m, i)] = acc;
        }
    }
    phi
}

/// `α_i^k = g_i^k ∫₀^τ χ_i(t) e^{iω_k t} dt` with `g_i^k = η_k b_i^k`.
pub fn spin_displacement(
    rabi: &EffectiveRabiVector,
    modes: &TransverseModes,
    lamb_dicke: &[f64],
    mu: f64,
    tau: f64,
) -> Result<DMatrix<Complex64>> {
    check_sizes(rabi.len(), modes, lamb_dicke)?;
    Ok(displacement_from(&rabi.values, modes, lamb_dicke, &mode_integrals(modes, mu, tau)))
}

/// `φ_in = Σ_k g_i^k g_n^k ∫∫_{t₁<t₂} [χ_i(t₂)χ_n(t₁) + χ_n(t₂)χ_i(t₁)] sin ω_k(t₂−t₁)`,
/// which for a common real drive phase is `2Σ_k g g ∫∫ χ_i(t₂)χ_n(t₁) sin ω_k(t₂−t₁)`.
pub fn conditional_phase(
    rabi: &EffectiveRabiVector,
    modes: &TransverseModes,
    lamb_dicke: &[f64],
    mu: f64,
    tau: f64,
) -> Result<DMatrix<f64>> {
    check_sizes(rabi.len(), modes, lamb_dicke)?;
    let ints = mode_integrals(modes, mu, tau);
    Ok(bilinear_phase(&rabi.values, &rabi.values, modes, lamb_dicke, &ints))
}

pub fn gate_phases(
    rabi: &EffectiveRabiVector,
    modes: &TransverseModes,
    lamb_dicke: &[f64],
    mu: f64,
    tau: f64,
) -> Result<GatePhases> {
    check_sizes(rabi.len(), modes, lamb_dicke)?;
    let ints = mode_integrals(modes, mu, tau);
    Ok(GatePhases {
        alpha: displacement_from(&rabi.values, modes, lamb_dicke, &ints),
        phi: bilinear_phase(&rabi.values, &rabi.values, modes, lamb_dicke, &ints),
    })
}

/// Chain, modes, occupations and target profiles shared by every detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSetup {
    pub trap: TrapConfig,
    pub geometry: ChainGeometry,
    pub modes: TransverseModes,
    pub lamb_dicke: Vec<f64>,
    pub occupations: Vec<f64>,
    pub pair: (usize, usize),
    pub profiles: [TargetProfile; 2],
    pub addressing: Addressing,
    pub tau: f64,
}

impl GateSetup {
    pub fn new(trap: &TrapConfig, config: &GateConfig) -> Result<Self> {
        config.validate(trap.ion_count)?;
        let geometry = chain_geometry(trap)?;
        let modes = transverse_mode_spectrum(&geometry, trap)?;
        Self::from_parts(trap, geometry, modes, config)
    }

    pub fn from_parts(trap: &TrapConfig, geometry: ChainGeometry, modes: TransverseModes, config: &GateConfig) -> Result<Self> {
        config.validate(geometry.len())?;
        let u = &geometry.dimensionless;
        let (j, n) = config.pair;
        let profiles = match config.addressing {
            Addressing::Perfect => [perfect_profile(u.len(), j), perfect_profile(u.len(), n)],
            Addressing::Refocused { waist_rel, n_corr } => {
                let a_min = u.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                let beam = BeamProfile::gaussian(waist_rel * a_min)?;
                if n_corr == 0 {
                    [bare_profile(u, &beam, j), bare_profile(u, &beam, n)]
                } else {
                    let ions = correction_beam_ions(u, config.pair, n_corr);
                    [target_profile(u, &beam, &ions, j)?, target_profile(u, &beam, &ions, n)?]
                }
            }
        };
        let lamb_dicke = modes.lamb_dicke_scaled(config.eta_com);
        let occupations = thermal_occupations(&modes);
        Ok(GateSetup {
            trap: *trap,
            geometry,
            modes,
            lamb_dicke,
            occupations,
            pair: config.pair,
            profiles,
            addressing: config.addressing,
            tau: config.tau(),
        })
    }

    /// Single-beam profile of refocused addressing in chain units.
    pub fn beam(&self) -> Option<BeamProfile> {
        match self.addressing {
            Addressing::Perfect => None,
            Addressing::Refocused { waist_rel, .. } => {
                let a_min = self
                    .geometry
                    .dimensionless
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(f64::INFINITY, f64::min);
                BeamProfile::gaussian(waist_rel * a_min).ok()
            }
        }
    }

    /// Copy with every beam amplitude of target `t` multiplied by
    /// `factors[t][b]`, in the order of `profiles[t].beam_ions`.
    pub fn with_beam_errors(&self, factors: [&[Complex64]; 2]) -> Result<Self> {
        let beam = self
            .beam()
            .ok_or_else(|| Error::invalid("addressing", "perfect focusing has no beams to perturb"))?;
        let u = &self.geometry.dimensionless;
        let mut out = self.clone();
        for (profile, f) in out.profiles.iter_mut().zip(factors) {
            if f.len() != profile.beam_ions.len() {
                return Err(Error::DimensionMismatch {
                    expected: profile.beam_ions.len(),
                    found: f.len(),
                });
            }
            let centers: Vec<f64> = profile.beam_ions.iter().map(|&i| u[i]).collect();
            let amplitudes = profile.amplitudes.iter().zip(f).map(|(a, b)| a * b).collect();
            *profile = profile_from(u, &beam, profile.beam_ions.clone(), &centers, amplitudes, profile.target);
        }
        Ok(out)
    }

    pub fn rabi(&self, rabi_j: f64, rabi_n: f64) -> EffectiveRabiVector {
        let [pj, pn] = &self.profiles;
        EffectiveRabiVector {
            values: pj.at_ions.iter().zip(&pn.at_ions).map(|(a, b)| a * rabi_j + b * rabi_n).collect(),
        }
    }

    /// Precomputes the unit-drive pieces at detuning `mu`.
    pub fn model(&self, mu: f64) -> GateModel {
        let ints = mode_integrals(&self.modes, mu, self.tau);
        let [pj, pn] = &self.profiles;
        let eta = &self.lamb_dicke;
        GateModel {
            mu,
            pair: self.pair,
            alpha_j: displacement_from(&pj.at_ions, &self.modes, eta, &ints),
            alpha_n: displacement_from(&pn.at_ions, &self.modes, eta, &ints),
            phi_jj: bilinear_phase(&pj.at_ions, &pj.at_ions, &self.modes, eta, &ints),
            phi_jn: bilinear_phase(&pj.at_ions, &pn.at_ions, &self.modes, eta, &ints) * 2.0,
            phi_nn: bilinear_phase(&pn.at_ions, &pn.at_ions, &self.modes, eta, &ints),
            occupations: self.occupations.clone(),
        }
    }
}

/// Gate phases as a quadratic function of `(Ω_j, Ω_n)` at fixed detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct GateModel {
    pub mu: f64,
    pub pair: (usize, usize),
    alpha_j: DMatrix<Complex64>,
    alpha_n: DMatrix<Complex64>,
    phi_jj: DMatrix<f64>,
    phi_jn: DMatrix<f64>,
    phi_nn: DMatrix<f64>,
    occupations: Vec<f64>,
}

impl GateModel {
    pub fn phases(&self, rabi_j: f64, rabi_n: f64) -> GatePhases {
        GatePhases {
            alpha: &self.alpha_j * Complex64::new(rabi_j, 0.0) + &self.alpha_n * Complex64::new(rabi_n, 0.0),
            phi: &self.phi_jj * (rabi_j * rabi_j) + &self.phi_jn * (rabi_j * rabi_n) + &self.phi_nn * (rabi_n * rabi_n),
        }
    }

    /// `φ_jn` at the given amplitudes.
    pub fn pair_phase(&self, rabi_j: f64, rabi_n: f64) -> f64 {
        let (j, n) = self.pair;
        self.phi_jj[(j, n)] * rabi_j * rabi_j + self.phi_jn[(j, n)] * rabi_j * rabi_n + self.phi_nn[(j, n)] * rabi_n * rabi_n
    }

    pub fn fidelity(&self, rabi_j: f64, rabi_n: f64) -> FidelityResult {
        gate_fidelity(&self.phases(rabi_j, rabi_n), &self.occupations, self.pair)
    }

    pub fn infidelity(&self, rabi_j: f64, rabi_n: f64) -> f64 {
        self.fidelity(rabi_j, rabi_n).infidelity
    }
}
