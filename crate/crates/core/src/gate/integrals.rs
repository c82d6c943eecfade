//! Closed-form time integrals of the constant-amplitude drive.
//!
//! Frequencies are in units of ω_z and times in units of 1/ω_z. A drive with
//! complex amplitude `Ω` is `χ(t) = Re Ω sin μt + Im Ω cos μt`; the two
//! quadratures are handled separately so every integral below is exact.

use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const SMALL_PHASE: f64 = 1e-4;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `∫₀^τ e^{iνt} dt`, continuous through `ν = 0`.
pub fn exp_integral(nu: f64, tau: f64) -> Complex64 {
    Complex64::from_polar(tau * sinc(0.5 * nu * tau), 0.5 * nu * tau)
}

/// `∫₀^τ dt₂ e^{iat₂} ∫₀^{t₂} dt₁ e^{ibt₁}`.
pub fn ordered_exp_integral(a: f64, b: f64, tau: f64) -> Complex64 {
    if (b * tau).abs() >= SMALL_PHASE {
        (exp_integral(a + b, tau) - exp_integral(a, tau)) / (I * b)
    } else if (a * tau).abs() >= SMALL_PHASE {
        // Both orderings add up to the product of the single integrals.
        exp_integral(a, tau) * exp_integral(b, tau) - ordered_exp_integral(b, a, tau)
    } else {
        let t2 = tau * tau;
        let t3 = t2 * tau;
        let t4 = t3 * tau;
        Complex64::new(
            t2 / 2.0 - (a * a * t4 / 4.0 + a * b * t4 / 4.0 + b * b * t4 / 12.0) / 2.0,
            a * t3 / 3.0 + b * t3 / 6.0,
        )
    }
}

/// Drive quadrature: `Sin` is `sin μt`, `Cos` is `cos μt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Sin,
    Cos,
}

impl Quadrature {
    pub const BOTH: [Quadrature; 2] = [Quadrature::Sin, Quadrature::Cos];

    /// Fourier coefficients on `e^{+iμt}` and `e^{−iμt}`.
    fn coefficients(self) -> [(f64, Complex64); 2] {
        match self {
            Quadrature::Sin => [(1.0, -0.5 * I), (-1.0, 0.5 * I)],
            Quadrature::Cos => [(1.0, Complex64::new(0.5, 0.0)), (-1.0, Complex64::new(0.5, 0.0))],
        }
    }

    /// Component of a complex amplitude carried by this quadrature.
    pub fn part(self, z: Complex64) -> f64 {
        match self {
            Quadrature::Sin => z.re,
            Quadrature::Cos => z.im,
        }
    }
}

/// `∫₀^τ q(μt) e^{iωt} dt`.
pub fn displacement_integral(q: Quadrature, mu: f64, omega: f64, tau: f64) -> Complex64 {
    q.coefficients()
        .iter()
        .map(|&(sign, c)| c * exp_integral(omega + sign * mu, tau))
        .sum()
}

/// `∫₀^τ dt₂ ∫₀^{t₂} dt₁ p(μt₂) q(μt₁) sin ω(t₂ − t₁)`.
pub fn phase_integral(p: Quadrature, q: Quadrature, mu: f64, omega: f64, tau: f64) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &(sp, cp) in &p.coefficients() {
        for &(sq, cq) in &q.coefficients() {
            acc += cp * cq * ordered_exp_integral(sp * mu + omega, sq * mu - omega, tau);
        }
    }
    acc.im
}

/// Per-mode integrals shared by every ion for one `(μ, τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeIntegrals {
    /// `[sin, cos]` displacement integrals.
    pub displacement: [Complex64; 2],
    /// `[[ss, sc], [cs, cc]]` ordered phase integrals.
    pub phase: [[f64; 2]; 2],
}

impl ModeIntegrals {
    pub fn new(mu: f64, omega: f64, tau: f64) -> Self {
        let [s, c] = Quadrature::BOTH;
        ModeIntegrals {
            displacement: [
                displacement_integral(s, mu, omega, tau),
                displacement_integral(c, mu, omega, tau),
            ],
            phase: [
                [phase_integral(s, s, mu, omega, tau), phase_integral(s, c, mu, omega, tau)],
                [phase_integral(c, s, mu, omega, tau), phase_integral(c, c, mu, omega, tau)],
            ],
        }
    }

    /// `∫₀^τ χ(t) e^{iωt} dt` for amplitude `z`.
    pub fn displacement_for(&self, z: Complex64) -> Complex64 {
        self.displacement[0] * z.re + self.displacement[1] * z.im
    }

    /// `∫∫_{t₁<t₂} [χ_a(t₂)χ_b(t₁) + χ_b(t₂)χ_a(t₁)] sin ω(t₂−t₁)`.
    pub fn symmetric_phase(&self, a: Complex64, b: Complex64) -> f64 {
        let qa = [a.re, a.im];
        let qb = [b.re, b.im];
        let mut acc = 0.0;
        for p in 0..2 {
            for q in 0..2 {
                acc += (qa[p] * qb[q] + qb[p] * qa[q]) * self.phase[p][q];
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exp_integral_limits() {
        let tau = 3.0;
        assert!((exp_integral(0.0, tau) - Complex64::new(tau, 0.0)).norm() < 1e-15);
        let nu = 0.7;
        let direct = ((I * nu * tau).exp() - 1.0) / (I * nu);
        assert!((exp_integral(nu, tau) - direct).norm() < 1e-14);
    }

    #[test]
    fn ordered_integral_branches_agree() {
        let tau = 2.0;
        // Straddle the branch thresholds from both sides.
        for &(a, b) in &[(0.3, 0.2), (0.3, 4.0e-5), (4.0e-5, 0.3), (2.0e-5, 3.0e-5), (0.0, 0.0)] {
            let v = ordered_exp_integral(a, b, tau);
            let swap = ordered_exp_integral(b, a, tau);
            let prod = exp_integral(a, tau) * exp_integral(b, tau);
            assert!((v + swap - prod).norm() < 1e-12, "({a}, {b})");
        }
        let near = ordered_exp_integral(0.3, 5.1e-5, tau);
        let just = ordered_exp_integral(0.3, 4.9e-5, tau);
        assert!((near - just).norm() < 1e-3);
        assert!((ordered_exp_integral(0.0, 0.0, tau) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn closed_loop_at_commensurate_times() {
        // μτ and ωτ both multiples of 2π with μ ≠ ω.
        let tau = 2.0 * PI;
        for q in Quadrature::BOTH {
            let a = displacement_integral(q, 3.0, 5.0, tau);
            assert!(a.norm() < 1e-14);
        }
    }

    #[test]
    fn resonant_limit_is_finite() {
        let tau = 5.0 * PI;
        let a = displacement_integral(Quadrature::Sin, 2.0, 2.0, tau);
        // sin(μt) e^{iμt} averages to i/2 over whole periods.
        assert!((a - Complex64::new(0.0, tau / 2.0)).norm() < 1e-12);
    }
}
