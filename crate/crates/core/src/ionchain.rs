//! Equilibrium positions and normal modes of ions in a linear harmonic trap.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Axial COM oscillator length `√(ħ/2Mω_z)` that fixes the default ion mass.
pub const REFERENCE_OSCILLATOR_LENGTH: f64 = 5.4e-9;
pub const REFERENCE_OMEGA_Z: f64 = 2.0 * PI * 1.0e6;
/// Cooling-transition linewidth used for the Doppler temperature.
pub const DOPPLER_LINEWIDTH: f64 = 2.0 * PI * 20.0e6;
pub const LAMB_DICKE_LIMIT: f64 = 0.2;

const MAX_IONS: usize = 100;
const EQUILIBRIUM_TOLERANCE: f64 = 1e-12;

/// Mass (kg) giving `√(ħ/2Mω_z) = 5.4 nm` at `ω_z = 2π·1 MHz`, about 173 u.
pub fn default_ion_mass() -> f64 {
    HBAR / (2.0 * REFERENCE_OMEGA_Z * REFERENCE_OSCILLATOR_LENGTH * REFERENCE_OSCILLATOR_LENGTH)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub ion_count: usize,
    /// Axial trap frequency (rad/s).
    pub omega_z: f64,
    /// `ω_x/ω_z`.
    pub anisotropy: f64,
    /// kg
    pub ion_mass: f64,
    /// C
    pub ion_charge: f64,
}

impl Default for TrapConfig {
    fn default() -> Self {
        Self {
            ion_count: 20,
            omega_z: REFERENCE_OMEGA_Z,
            anisotropy: 10.0,
            ion_mass: default_ion_mass(),
            ion_charge: ELEMENTARY_CHARGE,
        }
    }
}

impl TrapConfig {
    pub fn new(ion_count: usize, omega_z: f64, anisotropy: f64) -> Result<Self> {
        let cfg = Self {
            ion_count,
            omega_z,
            anisotropy,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_mass_amu(mut self, amu: f64) -> Result<Self> {
        self.ion_mass = amu * ATOMIC_MASS_UNIT;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_IONS).contains(&self.ion_count) {
            return Err(Error::invalid(
                "ion_count",
                format!("must lie in 1..={MAX_IONS}, got {}", self.ion_count),
            ));
        }
        for (name, v) in [
            ("omega_z", self.omega_z),
            ("anisotropy", self.anisotropy),
            ("ion_mass", self.ion_mass),
            ("ion_charge", self.ion_charge),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// `l = (Z²e²/4πε₀Mω_z²)^{1/3}`.
    pub fn length_scale(&self) -> f64 {
        (self.ion_charge * self.ion_charge
            / (4.0 * PI * EPSILON_0 * self.ion_mass * self.omega_z * self.omega_z))
            .cbrt()
    }

    /// `√(ħ/2Mω)` at frequency `omega`.
    pub fn oscillator_length(&self, omega: f64) -> f64 {
        (HBAR / (2.0 * self.ion_mass * omega)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainGeometry {
    /// Positions in units of the length scale, increasing.
    pub dimensionless: Vec<f64>,
    /// Positions in meters.
    pub positions: Vec<f64>,
    pub length_scale: f64,
    /// Largest force imbalance at the returned positions.
    pub residual: f64,
}

impl ChainGeometry {
    pub fn len(&self) -> usize {
        self.dimensionless.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dimensionless.is_empty()
    }

    pub fn with_length_scale(mut self, length_scale: f64) -> Self {
        self.positions = self.dimensionless.iter().map(|u| u * length_scale).collect();
        self.length_scale = length_scale;
        self
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacings().into_iter().fold(0.0, f64::max)
    }
}

/// Net force on each ion, `u_m − Σ_{n<m} 1/(u_m−u_n)² + Σ_{n>m} 1/(u_n−u_m)²`.
pub fn force_imbalance(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|m| {
            let mut f = u[m];
            for p in 0..n {
                if p != m {
                    let d = u[m] - u[p];
                    f -= d.signum() / (d * d);
                }
            }
            f
        })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Axial Hessian `B_nn = 1 + 2Σ1/|u_n−u_p|³`, `B_nm = −2/|u_n−u_m|³`.
pub fn axial_coupling_matrix(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 1.0;
        for j in 0..n {
            if i != j {
                let c = 2.0 / (u[i] - u[j]).abs().powi(3);
                b[(i, j)] = -c;
                diag += c;
            }
        }
        b[(i, i)] = diag;
    }
    b
}

/// Transverse matrix `A_nn = (ω_x/ω_z)² − Σ1/|u_n−u_p|³`, `A_nm = 1/|u_n−u_m|³`.
pub fn transverse_coupling_matrix(u: &[f64], anisotropy: f64) -> DMatrix<f64> {
    let n = u.len();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = anisotropy * anisotropy;
        for j in 0..n {
            if i != j {
                let c = 1.0 / (u[i] - u[j]).abs().powi(3);
                a[(i, j)] = c;
                diag -= c;
            }
        }
        a[(i, i)] = diag;
    }
    a
}

fn newton(mut u: Vec<f64>, max_iter: usize) -> std::result::Result<Vec<f64>, (Vec<f64>, f64)> {
    let mut f = force_imbalance(&u);
    let mut r = max_abs(&f);
    for _ in 0..max_iter {
        if r < EQUILIBRIUM_TOLERANCE {
            return Ok(u);
        }
        let jac = axial_coupling_matrix(&u);
        let rhs = DVector::from_vec(f.iter().map(|x| -x).collect());
        let Some(step) = jac.cholesky().map(|c| c.solve(&rhs)) else {
            return Err((u, r));
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            if trial.windows(2).all(|w| w[1] > w[0]) {
                let ft = force_imbalance(&trial);
                let rt = max_abs(&ft);
                if rt < r || rt < EQUILIBRIUM_TOLERANCE {
                    u = trial;
                    f = ft;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if r < EQUILIBRIUM_TOLERANCE {
        Ok(u)
    } else {
        Err((u, r))
    }
}

fn ramp_seed(n: usize) -> Vec<f64> {
    // Chain half-length grows roughly as N^0.56.
    let half = 0.63 * (n as f64 - 1.0).powf(0.56);
    (0..n)
        .map(|i| half * (2.0 * i as f64 / (n as f64 - 1.0) - 1.0))
        .collect()
}

fn symmetrize(u: &mut [f64]) {
    let n = u.len();
    let copy = u.to_vec();
    for i in 0..n {
        u[i] = 0.5 * (copy[i] - copy[n - 1 - i]);
    }
}

/// Dimensionless equilibrium positions of `n` ions (length scale 1).
pub fn equilibrium_positions(n: usize) -> Result<ChainGeometry> {
    if !(1..=MAX_IONS).contains(&n) {
        return Err(Error::invalid("n", format!("must lie in 1..={MAX_IONS}, got {n}")));
    }
    if n == 1 {
        return Ok(ChainGeometry {
            positions: vec![0.0],
            dimensionless: vec![0.0],
            length_scale: 1.0,
            residual: 0.0,
        });
    }
    let u = match newton(ramp_seed(n), 200) {
        Ok(u) => u,
        Err(_) => {
            // Grow the chain one ion at a time from the two-ion solution.
            let mut u = vec![-(0.25f64.cbrt()), 0.25f64.cbrt()];
            for m in 3..=n {
                let step = u[1] - u[0];
                let mut seed = Vec::with_capacity(m);
                seed.push(u[0] - 0.5 * step);
                seed.extend(u.iter().copied());
                seed.push(u[u.len() - 1] + 0.5 * step);
                let scale = (m as f64 / (m - 1) as f64).powf(0.56);
                seed.iter_mut().for_each(|x| *x *= scale);
                symmetrize(&mut seed);
                u = newton(seed, 200).map_err(|(_, r)| Error::NoConvergence {
                    what: "equilibrium Newton iteration",
                    iterations: 200,
                    residual: r,
                })?;
            }
            u
        }
    };
    let mut u = u;
    symmetrize(&mut u);
    // One more step after symmetrizing keeps the residual at the tolerance.
    let u = newton(u, 5).map_err(|(_, r)| Error::NoConvergence {
        what: "equilibrium Newton iteration",
        iterations: 5,
        residual: r,
    })?;
    let residual = max_abs(&force_imbalance(&u));
    Ok(ChainGeometry {
        positions: u.clone(),
        dimensionless: u,
        length_scale: 1.0,
        residual,
    })
}

/// Physical equilibrium of the chain described by `config`.
pub fn chain_geometry(config: &TrapConfig) -> Result<ChainGeometry> {
    config.validate()?;
    Ok(equilibrium_positions(config.ion_count)?.with_length_scale(config.length_scale()))
}

/// Normal modes along one direction, sorted by descending frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalModes {
    /// rad/s
    pub frequencies: Vec<f64>,
    /// Column `k` holds mode `k`; row `j` is the ion.
    pub vectors: DMatrix<f64>,
    pub omega_z: f64,
}

pub type TransverseModes = NormalModes;
pub type AxialModes = NormalModes;

impl NormalModes {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn frequencies_over_omega_z(&self) -> Vec<f64> {
        self.frequencies.iter().map(|w| w / self.omega_z).collect()
    }

    /// `b_j^k`
    pub fn component(&self, ion: usize, mode: usize) -> f64 {
        self.vectors[(ion, mode)]
    }

    /// `η_k = η_COM √(ω_COM/ω_k)`, with the COM mode first.
    pub fn lamb_dicke_scaled(&self, eta_com: f64) -> Vec<f64> {
        let com = self.frequencies[0];
        self.frequencies.iter().map(|w| eta_com * (com / w).sqrt()).collect()
    }

    /// `η_k = |Δk| √(ħ/2Mω_k)`.
    pub fn lamb_dicke(&self, delta_k: f64, ion_mass: f64) -> Vec<f64> {
        self.frequencies
            .iter()
            .map(|w| delta_k.abs() * (HBAR / (2.0 * ion_mass * w)).sqrt())
            .collect()
    }

    /// Largest `‖Av − λv‖` and largest deviation of `VᵀV` from the identity.
    pub fn check_against(&self, matrix: &DMatrix<f64>) -> (f64, f64) {
        let mut eig_res: f64 = 0.0;
        for (k, w) in self.frequencies.iter().enumerate() {
            let lambda = (w / self.omega_z).powi(2);
            let v = self.vectors.column(k);
            eig_res = eig_res.max((matrix * v - v * lambda).norm());
        }
        let gram = self.vectors.transpose() * &self.vectors;
        let ortho = (gram - DMatrix::identity(self.len(), self.len())).amax();
        (eig_res, ortho)
    }
}

fn modes_from(matrix: DMatrix<f64>, omega_z: f64, anisotropy: f64) -> Result<NormalModes> {
    let n = matrix.nrows();
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut frequencies = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[src];
        if !(lambda > 0.0) {
            return Err(Error::ZigzagInstability {
                mode: k,
                eigenvalue: lambda,
                anisotropy,
            });
        }
        frequencies.push(omega_z * lambda.sqrt());
        let mut v = eig.eigenvectors.column(src).into_owned();
        // Fix the sign: first clearly nonzero component positive.
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-8) {
            if *first < 0.0 {
                v = -v;
            }
        }
        vectors.set_column(k, &v);
    }
    Ok(NormalModes {
        frequencies,
        vectors,
        omega_z,
    })
}

pub fn transverse_mode_spectrum(geometry: &ChainGeometry, config: &TrapConfig) -> Result<TransverseModes> {
    config.validate()?;
    if geometry.len() != config.ion_count {
        return Err(Error::DimensionMismatch {
            expected: config.ion_count,
            found: geometry.len(),
        });
    }
    let a = transverse_coupling_matrix(&geometry.dimensionless, config.anisotropy);
    modes_from(a, config.omega_z, config.anisotropy)
}

pub fn axial_mode_spectrum(geometry: &ChainGeometry, config: &TrapConfig) -> Result<AxialModes> {
    config.validate()?;
    if geometry.len() != config.ion_count {
        return Err(Error::DimensionMismatch {
            expected: config.ion_count,
            found: geometry.len(),
        });
    }
    let b = axial_coupling_matrix(&geometry.dimensionless);
    modes_from(b, config.omega_z, config.anisotropy)
}

/// Bose occupation `1/(e^{ħω/k_BT} − 1)`.
pub fn bose_occupation(omega: f64, kt: f64) -> f64 {
    1.0 / (HBAR * omega / kt).exp_m1()
}

/// `k_BT = ħΓ/2`.
pub fn doppler_temperature(linewidth: f64) -> f64 {
    HBAR * linewidth / 2.0
}

/// Occupations at the temperature where the highest mode holds one phonon:
/// `n̄_k = 1/(2^{ω_k/ω_max} − 1)`.
pub fn thermal_occupations(modes: &NormalModes) -> Vec<f64> {
    let top = modes.frequencies.iter().copied().fold(0.0, f64::max);
    modes
        .frequencies
        .iter()
        .map(|w| 1.0 / (std::f64::consts::LN_2 * w / top).exp_m1())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_and_three_ions() {
        let g = equilibrium_positions(2).unwrap();
        assert!((g.dimensionless[1] - 0.25f64.cbrt()).abs() < 1e-14);
        assert!((g.dimensionless[0] + 0.25f64.cbrt()).abs() < 1e-14);
        let g = equilibrium_positions(3).unwrap();
        let c = 1.25f64.cbrt();
        assert!((g.dimensionless[0] + c).abs() < 1e-13);
        assert!(g.dimensionless[1].abs() < 1e-14);
        assert!((g.dimensionless[2] - c).abs() < 1e-13);
    }

    #[test]
    fn large_chains_converge() {
        for n in [10, 50, 100] {
            let g = equilibrium_positions(n).unwrap();
            assert!(g.residual < 1e-12, "n={n} residual {}", g.residual);
            assert!(g.dimensionless.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(equilibrium_positions(0).is_err());
        assert_eq!(equilibrium_positions(1).unwrap().dimensionless, vec![0.0]);
        assert!(equilibrium_positions(101).is_err());
        assert!(TrapConfig::new(5, -1.0, 10.0).is_err());
    }

    #[test]
    fn default_mass_and_length() {
        let m = default_ion_mass() / ATOMIC_MASS_UNIT;
        assert!((m - 173.3).abs() < 0.1);
        let cfg = TrapConfig::default();
        assert!((cfg.oscillator_length(cfg.omega_z) - 5.4e-9).abs() < 1e-15);
        assert!((cfg.length_scale() - 2.728e-6).abs() < 2e-9);
    }

    #[test]
    fn two_ion_transverse_modes() {
        let cfg = TrapConfig::new(2, REFERENCE_OMEGA_Z, 10.0).unwrap();
        let g = chain_geometry(&cfg).unwrap();
        let modes = transverse_mode_spectrum(&g, &cfg).unwrap();
        let f = modes.frequencies_over_omega_z();
        assert!((f[0] - 10.0).abs() < 1e-12);
        assert!((f[1] - 99.0f64.sqrt()).abs() < 1e-12);
        let s = 0.5f64.sqrt();
        assert!((modes.component(0, 0) - s).abs() < 1e-12);
        assert!((modes.component(1, 0) - s).abs() < 1e-12);
    }

    #[test]
    fn twenty_ion_band() {
        let cfg = TrapConfig::default();
        let g = chain_geometry(&cfg).unwrap();
        let modes = transverse_mode_spectrum(&g, &cfg).unwrap();
        let f = modes.frequencies_over_omega_z();
        assert!((f[0] - 10.0).abs() < 1e-10);
        assert!(f.windows(2).all(|w| w[0] >= w[1]));
        assert!(f.iter().all(|&x| x > 0.0 && x <= 10.0 + 1e-10));
        let (res, ortho) = modes.check_against(&transverse_coupling_matrix(&g.dimensionless, 10.0));
        assert!(res < 1e-10 && ortho < 1e-12);
    }

    #[test]
    fn zigzag_is_reported() {
        let cfg = TrapConfig::new(20, REFERENCE_OMEGA_Z, 3.0).unwrap();
        let g = chain_geometry(&cfg).unwrap();
        assert!(matches!(
            transverse_mode_spectrum(&g, &cfg),
            Err(Error::ZigzagInstability { anisotropy, .. }) if anisotropy == 3.0
        ));
    }

    #[test]
    fn occupations() {
        let modes = NormalModes {
            frequencies: vec![10.0, 9.95],
            vectors: DMatrix::identity(2, 2),
            omega_z: 1.0,
        };
        let n = thermal_occupations(&modes);
        assert!((n[0] - 1.0).abs() < 1e-14);
        assert!((n[1] - 1.0 / (2f64.powf(0.995) - 1.0)).abs() < 1e-12);
        assert!((n[1] - 1.006_968).abs() < 1e-6);
    }

    #[test]
    fn axial_com_is_trap_frequency() {
        let cfg = TrapConfig::new(7, REFERENCE_OMEGA_Z, 10.0).unwrap();
        let g = chain_geometry(&cfg).unwrap();
        let modes = axial_mode_spectrum(&g, &cfg).unwrap();
        let f = modes.frequencies_over_omega_z();
        // Lowest axial mode is COM at ω_z, next is breathing at √3 ω_z.
        assert!((f[6] - 1.0).abs() < 1e-12);
        assert!((f[5] - 3.0f64.sqrt()).abs() < 1e-10);
    }
}
