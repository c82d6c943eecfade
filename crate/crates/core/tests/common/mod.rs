//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_4;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use refocus_core::gate::GatePhases;

const PANEL: f64 = 0.25;
const DEGREE: usize = 20;

/// Composite Gauss–Legendre nodes and weights on `[a, b]`.
pub fn composite_rule(a: f64, b: f64) -> Vec<(f64, f64)> {
    if b <= a {
        return Vec::new();
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(DEGREE).unwrap());
    let panels = ((b - a) / PANEL).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * DEGREE);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for &(x, w) in rule.as_node_weight_pairs() {
            out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

/// Drive `Re z sin μt + Im z cos μt`.
pub fn drive(z: Complex64, mu: f64) -> impl Fn(f64) -> f64 {
    move |t| z.re * (mu * t).sin() + z.im * (mu * t).cos()
}

/// `∫₀^τ χ(t) e^{iωt} dt` by quadrature.
pub fn quad_displacement(chi: impl Fn(f64) -> f64, omega: f64, tau: f64) -> Complex64 {
    composite_rule(0.0, tau)
        .into_iter()
        .map(|(t, w)| Complex64::from_polar(w * chi(t), omega * t))
        .sum()
}

/// `∫₀^τ dt₂ ∫₀^{t₂} dt₁ [χ_a(t₂)χ_b(t₁) + χ_b(t₂)χ_a(t₁)] sin ω(t₂ − t₁)` by
/// nested quadrature.
pub fn quad_phase(chi_a: impl Fn(f64) -> f64, chi_b: impl Fn(f64) -> f64, omega: f64, tau: f64) -> f64 {
    let mut total = 0.0;
    for (t2, w2) in composite_rule(0.0, tau) {
        let mut inner = 0.0;
        for (t1, w1) in composite_rule(0.0, t2) {
            inner += w1 * (chi_a(t2) * chi_b(t1) + chi_b(t2) * chi_a(t1)) * (omega * (t2 - t1)).sin();
        }
        total += w2 * inner;
    }
    total
}

/// Truncated annihilation operator.
pub fn annihilation(dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |r, c| {
        if c == r + 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `exp(β a† − β* a)` in a truncated Fock space, by matrix exponential.
pub fn displacement_matrix(beta: Complex64, dim: usize) -> DMatrix<Complex64> {
    let a = annihilation(dim);
    let gen = a.adjoint() * beta - &a * beta.conj();
    gen.exp()
}

/// Thermal populations up to `cutoff` and the missing tail mass.
pub fn thermal_populations(nbar: f64, cutoff: usize) -> (Vec<f64>, f64) {
    let q = nbar / (nbar + 1.0);
    let p: Vec<f64> = (0..=cutoff).map(|n| q.powi(n as i32) / (nbar + 1.0)).collect();
    let tail = 1.0 - p.iter().sum::<f64>();
    (p, tail)
}

/// Fidelity by explicit enumeration of spectator configurations and
/// truncated-Fock displacement operators for every mode.
pub fn fock_fidelity(phases: &GatePhases, occupations: &[f64], pair: (usize, usize), cutoff: usize) -> f64 {
    let ions = phases.alpha.nrows();
    let modes = phases.alpha.ncols();
    let dim = 2 * cutoff + 20;
    let pops: Vec<Vec<f64>> = occupations
        .iter()
        .map(|&nb| {
            let (p, tail) = thermal_populations(nb, cutoff);
            assert!(tail < 1e-8, "Fock cutoff {cutoff} too small for n̄ = {nb}");
            p
        })
        .collect();
    let spectators: Vec<usize> = (0..ions).filter(|&i| i != pair.0 && i != pair.1).collect();
    let targets = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let mut acc = 0.0;
    let configs = 1usize << spectators.len();
    for bits in 0..configs {
        let mut spins = vec![0.0; ions];
        for (b, &i) in spectators.iter().enumerate() {
            spins[i] = if bits >> b & 1 == 1 { -1.0 } else { 1.0 };
        }
        let mut states: Vec<(Complex64, Vec<DMatrix<Complex64>>)> = Vec::new();
        for &(sj, sn) in &targets {
            spins[pair.0] = sj;
            spins[pair.1] = sn;
            let mut phase = -FRAC_PI_4 * sj * sn;
            for i in 0..ions {
                for m in (i + 1)..ions {
                    phase += phases.phi[(i, m)] * spins[i] * spins[m];
                }
            }
            let ds = (0..modes)
                .map(|k| {
                    let t: Complex64 = (0..ions).map(|i| phases.alpha[(i, k)] * spins[i]).sum();
                    displacement_matrix(Complex64::new(0.0, 1.0) * t, dim)
                })
                .collect();
            states.push((Complex64::from_polar(1.0, phase), ds));
        }
        let mut f = Complex64::new(0.0, 0.0);
        for (c, d) in &states {
            for (cp, dp) in &states {
                let mut overlap = Complex64::new(1.0, 0.0);
                for k in 0..modes {
                    let mut tr = Complex64::new(0.0, 0.0);
                    for (n, p) in pops[k].iter().enumerate() {
                        tr += dp[k].column(n).dotc(&d[k].column(n)) * *p;
                    }
                    overlap *= tr;
                }
                f += c * cp.conj() * overlap;
            }
        }
        acc += f.re / 16.0;
    }
    acc / configs as f64
}

/// Integrates `i dψ/dt = H(t) ψ` for one mode driven by
/// `H = −F(t) (a† e^{iωt} + a e^{−iωt})` from the vacuum with classical RK4.
pub fn rk4_single_mode(force: impl Fn(f64) -> f64, omega: f64, tau: f64, steps: usize, dim: usize) -> DVector<Complex64> {
    let a = annihilation(dim);
    let ad = a.adjoint();
    let i = Complex64::new(0.0, 1.0);
    let rhs = |t: f64, psi: &DVector<Complex64>| -> DVector<Complex64> {
        let e = Complex64::from_polar(1.0, omega * t);
        let h = (&ad * e + &a * e.conj()) * Complex64::new(-force(t), 0.0);
        (h * psi) * (-i)
    };
    let mut psi = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    psi[0] = Complex64::new(1.0, 0.0);
    let dt = tau / steps as f64;
    for s in 0..steps {
        let t = s as f64 * dt;
        let k1 = rhs(t, &psi);
        let k2 = rhs(t + dt / 2.0, &(&psi + &k1 * Complex64::new(dt / 2.0, 0.0)));
        let k3 = rhs(t + dt / 2.0, &(&psi + &k2 * Complex64::new(dt / 2.0, 0.0)));
        let k4 = rhs(t + dt, &(&psi + &k3 * Complex64::new(dt, 0.0)));
        psi += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0);
    }
    psi
}

/// Coherent state `|β⟩` in the truncated basis.
pub fn coherent_state(beta: Complex64, dim: usize) -> DVector<Complex64> {
    let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    let mut term = Complex64::new((-beta.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        v[n] = term;
        term = term * beta / ((n + 1) as f64).sqrt();
    }
    v
}
