//! Rabi-amplitude optimization and detuning scans.
//!
//! Amplitudes are searched in `p = ln|Ω_jΩ_n|` and `r = ln|Ω_j/Ω_n|` by
//! coordinate descent with golden-section line searches. The pair phase is
//! mostly a function of `p`, which keeps the two directions nearly
//! independent. Both relative signs of `Ω_n` are tried.

use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GateModel, GateSetup};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerBudget {
    /// Coordinate-descent sweeps per sign restart.
    pub sweeps: usize,
    /// Golden-section iterations per line search.
    pub line_iterations: usize,
    /// Initial half-width of each line search in log amplitude.
    pub initial_step: f64,
    /// Upper bound on `|Ω_j|` and `|Ω_n|`.
    pub max_rabi: Option<f64>,
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        Self {
            sweeps: 30,
            line_iterations: 60,
            initial_step: 1.0,
            max_rabi: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiOptimum {
    pub rabi_j: f64,
    pub rabi_n: f64,
    pub infidelity: f64,
    pub pair_phase: f64,
    pub evaluations: usize,
    /// True when the sweep budget ran out before the objective settled.
    pub stagnated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    /// `μ/ω_z`
    pub mu: f64,
    pub rabi_j: f64,
    pub rabi_n: f64,
    pub infidelity: f64,
    pub stagnated: bool,
}

fn golden(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, iterations: usize) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iterations {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn amplitudes(x: [f64; 2], sign: f64) -> (f64, f64) {
    (((x[0] + x[1]) / 2.0).exp(), sign * ((x[0] - x[1]) / 2.0).exp())
}

/// Minimizes the infidelity of `model` over `(Ω_j, Ω_n)`.
pub fn optimize_rabi(model: &GateModel, budget: &OptimizerBudget) -> RabiOptimum {
    let mut best: Option<RabiOptimum> = None;
    let mut evaluations = 0usize;
    for sign in [1.0, -1.0] {
        let unit = model.pair_phase(1.0, sign);
        if !(unit.abs() > 0.0 && unit.is_finite()) {
            continue;
        }
        let mut objective = |x: [f64; 2]| {
            evaluations += 1;
            let (oj, on) = amplitudes(x, sign);
            if let Some(cap) = budget.max_rabi {
                if oj.abs() > cap || on.abs() > cap {
                    return 1.0 + oj.abs().max(on.abs()) - cap;
                }
            }
            model.infidelity(oj, on)
        };
        let mut x = [(FRAC_PI_4 / unit.abs()).ln(), 0.0];
        let mut fx = objective(x);
        let mut step = [budget.initial_step; 2];
        let mut stagnated = true;
        for _ in 0..budget.sweeps {
            let before = fx;
            for c in 0..2 {
                let center = x[c];
                let (xc, fc) = golden(
                    |v| {
                        let mut y = x;
                        y[c] = v;
                        objective(y)
                    },
                    center - step[c],
                    center + step[c],
                    budget.line_iterations,
                );
                if fc < fx {
                    x[c] = xc;
                    fx = fc;
                }
                step[c] = (2.0 * (x[c] - center).abs()).max(0.25 * step[c]).max(1e-8);
            }
            if before - fx <= 1e-15 + 1e-9 * fx {
                stagnated = false;
                break;
            }
        }
        let (oj, on) = amplitudes(x, sign);
        let candidate = RabiOptimum {
            rabi_j: oj,
            rabi_n: on,
            infidelity: fx,
            pair_phase: model.pair_phase(oj, on),
            evaluations: 0,
            stagnated,
        };
        if best.is_none_or(|b| candidate.infidelity < b.infidelity) {
            best = Some(candidate);
        }
    }
    let mut out = best.unwrap_or(RabiOptimum {
        rabi_j: 0.0,
        rabi_n: 0.0,
        infidelity: model.infidelity(0.0, 0.0),
        pair_phase: 0.0,
        evaluations: 0,
        stagnated: true,
    });
    out.evaluations = evaluations;
    out
}

/// Optimizes the amplitudes independently at every detuning in `mus`.
pub fn scan_detuning(setup: &GateSetup, mus: &[f64], budget: &OptimizerBudget) -> Vec<ScanPoint> {
    mus.par_iter()
        .map(|&mu| {
            let opt = optimize_rabi(&setup.model(mu), budget);
            ScanPoint {
                mu,
                rabi_j: opt.rabi_j,
                rabi_n: opt.rabi_n,
                infidelity: opt.infidelity,
                stagnated: opt.stagnated,
            }
        })
        .collect()
}
