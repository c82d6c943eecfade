//! Characteristic polynomial of the banded Gaussian Toeplitz matrix and the
//! exponential decay of its inverse.

use std::ops::RangeInclusive;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::EnvelopeSolution;
use crate::error::{Error, Result};

/// Coefficients (ascending powers) of
/// `P_n(x) = xⁿ (1 + Σ_{m=1..n} (x^{−m} + x^m) γ^{m²})`.
pub fn toeplitz_polynomial_coefficients(gamma: f64, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; 2 * n + 1];
    c[n] = 1.0;
    for m in 1..=n {
        let w = gamma.powi((m * m) as i32);
        c[n + m] = w;
        c[n - m] = w;
    }
    c
}

/// `P_n(x) / xⁿ = 1 + Σ_{m=1..n} (x^{−m} + x^m) γ^{m²}`.
pub fn toeplitz_polynomial_reduced(gamma: f64, n: usize, x: Complex64) -> Complex64 {
    let inv = x.inv();
    let mut acc = Complex64::new(1.0, 0.0);
    let mut up = Complex64::new(1.0, 0.0);
    let mut down = Complex64::new(1.0, 0.0);
    for m in 1..=n {
        up *= x;
        down *= inv;
        acc += (up + down) * gamma.powi((m * m) as i32);
    }
    acc
}

fn horner(coeffs: &[f64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Parlett–Reinsch balancing with powers of two.
fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let radix = 2.0f64;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                f *= radix;
                cc *= radix;
                rr /= radix;
            }
            while cc >= rr * radix {
                f /= radix;
                cc /= radix;
                rr *= radix;
            }
            if (cc + rr) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            return;
        }
    }
}

/// All `2n` roots of `P_n`, from companion-matrix eigenvalues polished by
/// Newton steps.
pub fn toeplitz_polynomial_roots(gamma: f64, n: usize) -> Result<Vec<Complex64>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
    }
    if !(1..=6).contains(&n) {
        return Err(Error::invalid("n", format!("must lie in 1..=6, got {n}")));
    }
    let coeffs = toeplitz_polynomial_coefficients(gamma, n);
    let degree = 2 * n;
    let lead = coeffs[degree];
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -coeffs[i] / lead;
    }
    balance(&mut companion);
    let schur = Schur::try_new(companion, 1e-15, 10_000).ok_or(Error::NoConvergence {
        what: "companion-matrix eigenvalues",
        iterations: 10_000,
        residual: f64::NAN,
    })?;
    let mut roots: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    for r in roots.iter_mut() {
        let (mut p, _) = horner(&coeffs, *r);
        for _ in 0..20 {
            let (_, dp) = horner(&coeffs, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let candidate = *r - p / dp;
            let (pc, _) = horner(&coeffs, candidate);
            if pc.norm() < p.norm() {
                *r = candidate;
                p = pc;
            } else {
                break;
            }
        }
    }
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    Ok(roots)
}

/// The largest-magnitude real root in `[−1, 0)`.
pub fn dominant_negative_root(roots: &[Complex64]) -> Option<f64> {
    roots
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * z.norm().max(1e-300) && z.re >= -1.0 && z.re < 0.0)
        .map(|z| z.re)
        .min_by(|a, b| a.total_cmp(b))
}

/// Least-squares fit of `ln|f_j|` against the distance `|j − target|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Whether `sign(f_j) = (−1)^{|j−i|}` relative to the target on the range.
    pub alternating: bool,
    pub points: usize,
}

/// Fits the decay of the envelope over distances in `range`, using every beam
/// on either side of the target whose distance falls in the range.
pub fn fit_decay_constant(f: &EnvelopeSolution, range: RangeInclusive<usize>) -> Result<DecayFit> {
    let target = f.target as isize;
    let reference = f.f0();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut alternating = true;
    for d in range.clone() {
        for side in [-1isize, 1] {
            let j = target + side * d as isize;
            if j < 0 || j as usize >= f.len() || (d == 0 && side < 0) {
                continue;
            }
            let v = f.amplitudes[j as usize];
            if v.norm() == 0.0 || !v.norm().is_finite() {
                return Err(Error::ZeroAmplitude { index: j as usize });
            }
            // Project onto the target-beam phase so complex envelopes work too.
            let projected = (v * reference.conj()).re;
            let expected_sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            if projected * expected_sign <= 0.0 {
                alternating = false;
            }
            xs.push(d as f64);
            ys.push(v.norm().ln());
        }
    }
    if xs.len() < 4 {
        return Err(Error::invalid(
            "range",
            format!("need at least 4 points inside the solution, got {}", xs.len()),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("range", "all points share one distance"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit {
        slope,
        intercept: my - slope * mx,
        alternating,
        points: xs.len(),
    })
}
