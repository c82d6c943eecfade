use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Tail-mass bound used by [`theta3_order`].
const SERIES_TOLERANCE: f64 = 1e-15;

/// `γ = exp(−a²/w²)`.
pub fn gaussian_gamma(w_over_a: f64) -> f64 {
    (-1.0 / (w_over_a * w_over_a)).exp()
}

/// Smallest order `N` for which the dropped tail `2Σ_{n>N} γ^{n²}` is below
/// `1e−15`.
pub fn theta3_order(gamma: f64) -> usize {
    if gamma <= 0.0 {
        return 1;
    }
    let ln_gamma = gamma.ln();
    let mut order = 1usize;
    loop {
        let next = (order + 1) as f64;
        // 2γ^{(N+1)²} bounds the tail up to a factor 1/(1 − γ^{2N+3}).
        let tail = 2.0 * (next * next * ln_gamma).exp() / (1.0 - (ln_gamma * (2.0 * next + 1.0)).exp());
        if tail < SERIES_TOLERANCE || order > 10_000 {
            return order;
        }
        order += 1;
    }
}

/// Jacobi theta series `θ₃(k/2, γ) = 1 + 2Σ_{n=1..cutoff} γ^{n²} cos(nk)`,
/// the lattice spectrum of a Gaussian beam.
pub fn gaussian_spectrum(k: f64, gamma: f64, order_cutoff: usize) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
    }
    if order_cutoff < 1 {
        return Err(Error::invalid("order_cutoff", "must be at least 1"));
    }
    Ok(theta_sum(k, gamma, order_cutoff))
}

/// [`gaussian_spectrum`] with the cutoff from [`theta3_order`]. Accepts
/// `γ = 0` (a perfectly focused beam).
pub fn lattice_gaussian_spectrum(k: f64, gamma: f64) -> f64 {
    if gamma <= 0.0 {
        return 1.0;
    }
    theta_sum(k, gamma, theta3_order(gamma))
}

fn theta_sum(k: f64, gamma: f64, order: usize) -> f64 {
    let ln_gamma = gamma.ln();
    // Sum from the smallest term up.
    let tail: f64 = (1..=order)
        .rev()
        .map(|n| {
            let n = n as f64;
            (n * n * ln_gamma).exp() * (n * k).cos()
        })
        .sum();
    1.0 + 2.0 * tail
}

/// Narrow-waist approximation `f(0) ≈ 1/√(1 − 4γ²)`.
pub fn f0_small_waist(gamma: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&gamma) {
        return Err(Error::invalid(
            "gamma",
            format!("approximation needs 0 ≤ γ < 1/2, got {gamma}"),
        ));
    }
    Ok(1.0 / (1.0 - 4.0 * gamma * gamma).sqrt())
}

/// Wide-waist approximation `f(0) ≈ (2/π^{5/2}) (a/w)³ exp(π²w²/4a²)`.
pub fn f0_large_waist(w_over_a: f64) -> Result<f64> {
    if !(w_over_a >= 1.0 && w_over_a.is_finite()) {
        return Err(Error::invalid(
            "w_over_a",
            format!("approximation needs w/a ≥ 1, got {w_over_a}"),
        ));
    }
    Ok(2.0 / PI.powf(2.5) / w_over_a.powi(3) * (PI * PI * w_over_a * w_over_a / 4.0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_at_zero() {
        // Direct summation: 1 + 2(0.3 + 0.3⁴ + 0.3⁹ + 0.3¹⁶).
        let direct = 1.0 + 2.0 * (0.3 + 0.3f64.powi(4) + 0.3f64.powi(9) + 0.3f64.powi(16));
        let v = gaussian_spectrum(0.0, 0.3, 4).unwrap();
        assert!((v - direct).abs() < 1e-15);
        assert!((v - 1.616_239_374).abs() < 1e-9);
    }

    #[test]
    fn vanishing_gamma_is_flat() {
        for k in [0.0, 0.7, PI] {
            assert!((gaussian_spectrum(k, 1e-300, 5).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(lattice_gaussian_spectrum(k, 0.0), 1.0);
        }
    }

    #[test]
    fn small_gamma_expansion() {
        let gamma: f64 = 0.05;
        for k in [0.0, 1.0, 2.5] {
            let v = gaussian_spectrum(k, gamma, theta3_order(gamma)).unwrap();
            assert!((v - (1.0 + 2.0 * gamma * k.cos())).abs() <= 2.0 * gamma.powi(4) * (1.0 + gamma.powi(5)) + 1e-16);
        }
    }

    #[test]
    fn auto_order_drops_negligible_terms() {
        for gamma in [0.01, 0.3, 0.64, 0.9] {
            let n = theta3_order(gamma);
            let dropped = 2.0 * gamma.powi(((n + 1) * (n + 1)) as i32);
            assert!(dropped < 1e-15);
            let longer = gaussian_spectrum(0.3, gamma, n + 20).unwrap();
            assert!((lattice_gaussian_spectrum(0.3, gamma) - longer).abs() < 1e-14);
        }
    }

    #[test]
    fn spectrum_rejects_bad_gamma() {
        assert!(gaussian_spectrum(0.0, 0.0, 3).is_err());
        assert!(gaussian_spectrum(0.0, 1.0, 3).is_err());
        assert!(gaussian_spectrum(0.0, 0.5, 0).is_err());
    }

    #[test]
    fn small_waist_values() {
        assert_eq!(f0_small_waist(0.0).unwrap(), 1.0);
        assert!((f0_small_waist(0.3).unwrap() - 1.25).abs() < 1e-15);
        assert!(f0_small_waist(0.5).is_err());
    }

    #[test]
    fn large_waist_values() {
        let expect = 2.0 / PI.powf(2.5) * (PI * PI / 4.0).exp();
        assert!((f0_large_waist(1.0).unwrap() - expect).abs() < 1e-14);
        assert!((f0_large_waist(1.0).unwrap() - 1.348_137).abs() < 1e-6);
        let mut prev = 0.0;
        for i in 0..=40 {
            let v = f0_large_waist(1.0 + 0.05 * i as f64).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(f0_large_waist(0.9).is_err());
    }
}
