//! Complex linear solves shared by the envelope and spectral solvers.
//!
//! Two factorizations are available behind [`Factorization`]: a dense LU with
//! partial pivoting and a banded LU (LAPACK `gbtf2` layout) that is picked
//! automatically when the matrix has a narrow band once negligible entries are
//! dropped. Both expose solves with `A` and `Aᴴ`, which the Hager–Higham
//! one-norm estimator uses to report a condition number.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Entries below this fraction of the largest magnitude are treated as zero
/// when measuring the bandwidth.
pub const BAND_DROP_TOLERANCE: f64 = 1e-15;
/// Largest half-bandwidth handled by the banded path.
pub const MAX_BANDED_HALF_WIDTH: usize = 8;
/// Solves with a larger condition estimate are refused.
pub const DEFAULT_MAX_CONDITION: f64 = 1e12;

/// Half-bandwidth of `a` after dropping entries below
/// `BAND_DROP_TOLERANCE · max|a|`, as `(lower, upper)`.
pub fn bandwidth(a: &CMatrix) -> (usize, usize) {
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cutoff = BAND_DROP_TOLERANCE * scale;
    let mut lower = 0;
    let mut upper = 0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if a[(i, j)].norm() > cutoff {
                if i > j {
                    lower = lower.max(i - j);
                } else {
                    upper = upper.max(j - i);
                }
            }
        }
    }
    (lower, upper)
}

/// Banded LU factorization with partial pivoting.
///
/// Storage follows LAPACK: `A(i, j)` lives in row `kl + ku + i - j` of column
/// `j`, with `kl` extra rows reserved for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<Complex64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &CMatrix, kl: usize, ku: usize) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut lu = BandedLu {
            n,
            kl,
            ku,
            ldab,
            ab: vec![Complex64::new(0.0, 0.0); ldab * n],
            ipiv: vec![0; n],
        };
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                *lu.at_mut(kv + i - j, j) = a[(i, j)];
            }
        }

        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = -1.0;
            for i in 0..=km {
                let v = lu.at(kv + i, j).norm();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            lu.ipiv[j] = j + jp;
            let pivot = lu.at(kv + jp, j);
            if pivot.norm() == 0.0 {
                return Err(Error::Singular { column: j });
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in 0..=(ju - j) {
                    let (p, q) = (lu.idx(kv + jp - c, j + c), lu.idx(kv - c, j + c));
                    lu.ab.swap(p, q);
                }
            }
            if km > 0 {
                let inv = lu.at(kv, j).inv();
                for i in 1..=km {
                    *lu.at_mut(kv + i, j) *= inv;
                }
                for c in 1..=(ju - j) {
                    let u = lu.at(kv - c, j + c);
                    if u.norm() == 0.0 {
                        continue;
                    }
                    for i in 1..=km {
                        let l = lu.at(kv + i, j);
                        *lu.at_mut(kv + i - c, j + c) -= l * u;
                    }
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> usize {
        row + col * self.ldab
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> Complex64 {
        self.ab[self.idx(row, col)]
    }

    #[inline]
    fn at_mut(&mut self, row: usize, col: usize) -> &mut Complex64 {
        let k = self.idx(row, col);
        &mut self.ab[k]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        let kv = self.kl + self.ku;
        if self.kl > 0 {
            for j in 0..n.saturating_sub(1) {
                let km = self.kl.min(n - 1 - j);
                let l = self.ipiv[j];
                if l != j {
                    b.swap(l, j);
                }
                let bj = b[j];
                for i in 1..=km {
                    b[j + i] -= self.at(kv + i, j) * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.at(kv, j);
            let bj = b[j];
            for i in j.saturating_sub(kv)..j {
                b[i] -= self.at(kv + i - j, j) * bj;
            }
        }
    }

    /// Solves `Aᴴ x = b`.
    pub fn solve_adjoint_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        let kv = self.kl + self.ku;
        for j in 0..n {
            let mut acc = b[j];
            for i in j.saturating_sub(kv)..j {
                acc -= self.at(kv + i - j, j).conj() * b[i];
            }
            b[j] = acc / self.at(kv, j).conj();
        }
        if self.kl > 0 {
            for j in (0..n.saturating_sub(1)).rev() {
                let km = self.kl.min(n - 1 - j);
                let mut acc = b[j];
                for i in 1..=km {
                    acc -= self.at(kv + i, j).conj() * b[j + i];
                }
                b[j] = acc;
                let l = self.ipiv[j];
                if l != j {
                    b.swap(l, j);
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Dense {
        lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
        adjoint_lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    },
    Banded(BandedLu),
}

/// A factorized square system ready for repeated solves.
#[derive(Debug, Clone)]
pub struct Factorization {
    kind: Kind,
    n: usize,
    norm1: f64,
}

impl Factorization {
    /// Factorizes `a`, choosing the banded path when the dropped-entry
    /// bandwidth is at most [`MAX_BANDED_HALF_WIDTH`] on each side.
    pub fn new(a: &CMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        if n == 0 {
            return Err(Error::invalid("matrix", "empty system"));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                context: "system matrix",
            });
        }
        let norm1 = one_norm(a);
        let (kl, ku) = bandwidth(a);
        let banded = kl.max(ku) <= MAX_BANDED_HALF_WIDTH && 2 * (kl + ku) + 1 < n;
        let kind = if banded {
            Kind::Banded(BandedLu::factor(a, kl, ku)?)
        } else {
            Self::dense(a)?
        };
        Ok(Factorization { kind, n, norm1 })
    }

    /// Factorizes `a` with the dense path regardless of its band structure.
    pub fn new_dense(a: &CMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        Ok(Factorization {
            kind: Self::dense(a)?,
            n,
            norm1: one_norm(a),
        })
    }

    fn dense(a: &CMatrix) -> Result<Kind> {
        let lu = a.clone().lu();
        if !lu.is_invertible() {
            let u = lu.u();
            let column = (0..u.nrows())
                .find(|&i| u[(i, i)].norm() == 0.0)
                .unwrap_or(0);
            return Err(Error::Singular { column });
        }
        let adjoint_lu = a.adjoint().lu();
        Ok(Kind::Dense { lu, adjoint_lu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_banded(&self) -> bool {
        matches!(self.kind, Kind::Banded(_))
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        match &self.kind {
            Kind::Dense { lu, .. } => {
                let rhs = DVector::from_column_slice(b);
                lu.solve(&rhs)
                    .expect("factorization checked for invertibility")
                    .as_slice()
                    .to_vec()
            }
            Kind::Banded(band) => {
                let mut x = b.to_vec();
                band.solve_in_place(&mut x);
                x
            }
        }
    }

    pub fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        match &self.kind {
            Kind::Dense { adjoint_lu, .. } => {
                let rhs = DVector::from_column_slice(b);
                adjoint_lu
                    .solve(&rhs)
                    .expect("factorization checked for invertibility")
                    .as_slice()
                    .to_vec()
            }
            Kind::Banded(band) => {
                let mut x = b.to_vec();
                band.solve_adjoint_in_place(&mut x);
                x
            }
        }
    }

    /// One-norm condition number estimate `‖A‖₁ · est(‖A⁻¹‖₁)`.
    pub fn condition_estimate(&self) -> f64 {
        self.norm1 * self.inverse_norm1_estimate()
    }

    /// Hager's estimator with Higham's alternating-sign safeguard.
    fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.n;
        if n == 1 {
            let y = self.solve(&[Complex64::new(1.0, 0.0)]);
            return y[0].norm();
        }
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut estimate = 0.0;
        let mut last_index = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            estimate = y.iter().map(|z| z.norm()).sum::<f64>();
            let xi: Vec<Complex64> = y
                .iter()
                .map(|z| {
                    let m = z.norm();
                    if m > 0.0 {
                        z / m
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                })
                .collect();
            let z = self.solve_adjoint(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= ztx || j == last_index {
                break;
            }
            last_index = j;
            x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            x[j] = Complex64::new(1.0, 0.0);
        }
        let alt: Vec<Complex64> = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::new(sign * (1.0 + i as f64 / (n - 1) as f64), 0.0)
            })
            .collect();
        let y = self.solve(&alt);
        let alt_estimate = 2.0 * y.iter().map(|z| z.norm()).sum::<f64>() / (3.0 * n as f64);
        estimate.max(alt_estimate)
    }
}

pub fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Result of a checked solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<Complex64>,
    pub condition: f64,
    pub banded: bool,
}

/// Solves `a x = b`, refusing systems whose condition estimate exceeds
/// `max_condition`.
pub fn solve_checked(a: &CMatrix, b: &[Complex64], max_condition: f64) -> Result<Solution> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    let factor = Factorization::new(a)?;
    let condition = factor.condition_estimate();
    if !condition.is_finite() || condition > max_condition {
        return Err(Error::IllConditioned {
            condition,
            threshold: max_condition,
        });
    }
    let x = factor.solve(b);
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite {
            context: "linear solve",
        });
    }
    Ok(Solution {
        x,
        condition,
        banded: factor.is_banded(),
    })
}

/// `max_n |Σ_j a[n][j] x[j] − b[n]|`.
pub fn residual_max(a: &CMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    (0..a.nrows())
        .map(|n| {
            let row: Complex64 = (0..a.ncols()).map(|j| a[(n, j)] * x[j]).sum();
            (row - b[n]).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pentadiagonal(n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| {
            let d = i.abs_diff(j);
            match d {
                0 => Complex64::new(1.0 + 0.1 * i as f64, 0.2),
                1 => Complex64::new(2.5, -0.3 * j as f64),
                2 => c(0.7),
                _ => c(0.0),
            }
        })
    }

    #[test]
    fn banded_matches_dense_with_pivoting() {
        // Off-diagonals dominate the diagonal, forcing row swaps.
        let a = pentadiagonal(12);
        let b: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let band = Factorization::new(&a).unwrap();
        assert!(band.is_banded());
        let dense = Factorization::new_dense(&a).unwrap();
        let xb = band.solve(&b);
        let xd = dense.solve(&b);
        for (p, q) in xb.iter().zip(&xd) {
            assert!((p - q).norm() < 1e-10, "{p} vs {q}");
        }
        assert!(residual_max(&a, &xb, &b) < 1e-10);

        let ab = band.solve_adjoint(&b);
        let ad = dense.solve_adjoint(&b);
        for (p, q) in ab.iter().zip(&ad) {
            assert!((p - q).norm() < 1e-10);
        }
    }

    #[test]
    fn bandwidth_drops_negligible_entries() {
        let mut a = pentadiagonal(10);
        a[(9, 0)] = c(1e-17);
        assert_eq!(bandwidth(&a), (2, 2));
        a[(9, 0)] = c(1e-3);
        assert_eq!(bandwidth(&a), (9, 2));
    }

    #[test]
    fn condition_estimate_of_diagonal_matrix_is_exact() {
        let a = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(4.0), c(0.01), c(2.0)]));
        let f = Factorization::new_dense(&a).unwrap();
        assert!((f.condition_estimate() - 400.0).abs() < 1e-9);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = CMatrix::from_fn(3, 3, |i, _| c(i as f64 + 1.0));
        assert!(matches!(
            solve_checked(&a, &[c(1.0); 3], DEFAULT_MAX_CONDITION),
            Err(Error::Singular { .. }) | Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn ill_conditioned_matrix_reports_estimate() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(1.0 + 1e-14)]);
        match solve_checked(&a, &[c(1.0), c(0.0)], DEFAULT_MAX_CONDITION) {
            Err(Error::IllConditioned { condition, .. }) => assert!(condition > 1e13),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch() {
        let a = CMatrix::identity(3, 3);
        assert!(matches!(
            solve_checked(&a, &[c(1.0); 2], DEFAULT_MAX_CONDITION),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
