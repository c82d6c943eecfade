//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::fock_fidelity;
use refocus_core::envelope::{
    build_site_centered_matrix, dominant_negative_root, exponential_toy_solution, f0_large_waist, f0_small_waist,
    fit_decay_constant, gaussian_chain_envelope, gaussian_gamma, solve_envelope_exact, toeplitz_polynomial_reduced,
    toeplitz_polynomial_roots, BeamProfile, QubitLattice,
};
use refocus_core::gate::{
    gate_fidelity, gate_phases, optimize_rabi, Addressing, EffectiveRabiVector, GateConfig, GatePhases, GateSetup,
    OptimizerBudget,
};
use refocus_core::ionchain::{
    chain_geometry, equilibrium_positions, transverse_mode_spectrum, TrapConfig, REFERENCE_OMEGA_Z,
};
use refocus_core::noise::{axis, doppler_position_std, monte_carlo_grid};
use refocus_core::spectral::{max_tilt_angle, plane_wave_matrix, solve_spectral_amplitudes, PlaneWaveSet};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_budget(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn toy_model_exactness() -> Outcome {
    let start = Instant::now();
    let lambda = 0.6;
    let beam = BeamProfile::exponential_with_residue(lambda, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for n in [11, 101] {
        let target = n / 2;
        let m = build_site_centered_matrix(&QubitLattice::homogeneous(n, 1.0).unwrap(), &beam).unwrap();
        let f = exponential_toy_solution(lambda, n, target).unwrap();
        let g = m.apply(&f.amplitudes);
        for (j, v) in g.iter().enumerate() {
            let expected = if j == target { 1.0 } else { 0.0 };
            worst = worst.max((v - expected).norm());
        }
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-12 && within_budget(t, 1.0),
        format!("max |G(x_j) - δ| = {worst:.2e} (< 1e-12), {:.3} s (< 1 s)", t.as_secs_f64()),
    )
}

fn envelope_decay() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for w in [0.5, 1.0, 1.5] {
        let f = gaussian_chain_envelope(w, 401).unwrap();
        let fit = fit_decay_constant(&f, 5..=20).unwrap();
        let expected = -1.0 / (w * w);
        let rel = (fit.slope / expected - 1.0).abs();
        pass &= rel < 0.01 && fit.alternating;
        parts.push(format!("w/a={w}: slope {:.5} vs {expected:.5} ({:.2e} rel, alternating {})", fit.slope, rel, fit.alternating));
    }
    let t = start.elapsed();
    pass &= within_budget(t, 10.0);
    outcome(pass, format!("{}; {:.2} s (< 10 s)", parts.join("; "), t.as_secs_f64()))
}

fn f0_approximations() -> Outcome {
    let start = Instant::now();
    let (mut small_err, mut large_err, mut worst_w): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..=12 {
        let w = 0.2 + 0.05 * i as f64;
        let exact = gaussian_chain_envelope(w, 201).unwrap().f0().re;
        small_err = small_err.max((f0_small_waist(gaussian_gamma(w)).unwrap() / exact - 1.0).abs());
    }
    for i in 0..=10 {
        let w = 1.3 + 0.05 * i as f64;
        let exact = gaussian_chain_envelope(w, 201).unwrap().f0().re;
        let err = (f0_large_waist(w).unwrap() / exact - 1.0).abs();
        if err > large_err {
            (large_err, worst_w) = (err, w);
        }
    }
    let t = start.elapsed();
    outcome(
        small_err < 0.02 && large_err < 0.10 && within_budget(t, 10.0),
        format!(
            "narrow-waist max rel error {small_err:.2e} (< 2%), wide-waist {large_err:.2e} at w/a={worst_w:.2} (< 10%), {:.2} s (< 10 s)",
            t.as_secs_f64()
        ),
    )
}

fn root_theory() -> Outcome {
    let start = Instant::now();
    let (mut residual_err, mut root_err, mut worst) = (0.0f64, 0.0f64, (0.0, 0));
    for gamma in [0.2, 0.3, 0.5] {
        for n in [2, 3, 4] {
            let r = toeplitz_polynomial_reduced(gamma, n, Complex64::new(-gamma, 0.0)).norm();
            residual_err = residual_err.max((r - gamma.powi((n * n + n) as i32)).abs());
            let roots = toeplitz_polynomial_roots(gamma, n).unwrap();
            let dominant = dominant_negative_root(&roots).unwrap_or(f64::NAN);
            if (dominant + gamma).abs() > root_err {
                (root_err, worst) = ((dominant + gamma).abs(), (gamma, n));
            }
        }
    }
    let t = start.elapsed();
    outcome(
        residual_err < 1e-12 && root_err < 1e-4 && within_budget(t, 1.0),
        format!(
            "residual deviation {residual_err:.2e} (< 1e-12), dominant root deviation {root_err:.2e} at γ={}, n={} (< 1e-4), {:.3} s (< 1 s)",
            worst.0,
            worst.1,
            t.as_secs_f64()
        ),
    )
}

fn active_count(n: usize, w: f64, eps: f64) -> usize {
    let f = gaussian_chain_envelope(w, n).unwrap();
    f.amplitudes.iter().filter(|a| a.norm() > eps).count()
}

fn truncation_scaling() -> Outcome {
    let start = Instant::now();
    let eps = 1e-3;
    let mut pass = true;
    let mut parts = Vec::new();
    for w in [0.8, 1.0, 1.2] {
        let predicted = BeamProfile::gaussian(w).unwrap().predicted_active_count(1.0, eps).unwrap();
        let (short, long) = (active_count(101, w, eps), active_count(401, w, eps));
        pass &= (short as f64 - predicted).abs() <= 3.0 && short == long;
        parts.push(format!("w/a={w}: {short}/{long} beams vs {predicted:.2}"));
    }
    let t = start.elapsed();
    pass &= within_budget(t, 10.0);
    outcome(pass, format!("{} (±3, N=101 equals N=401); {:.2} s (< 10 s)", parts.join(", "), t.as_secs_f64()))
}

fn chain_numbers() -> Outcome {
    let start = Instant::now();
    let trap = TrapConfig::new(21, REFERENCE_OMEGA_Z, 10.0).unwrap();
    let g = chain_geometry(&trap).unwrap();
    let (min, max) = (g.min_spacing() * 1e6, g.max_spacing() * 1e6);
    let t = start.elapsed();
    outcome(
        (min / 1.02 - 1.0).abs() < 0.03 && (max / 1.78 - 1.0).abs() < 0.03 && within_budget(t, 1.0),
        format!("min spacing {min:.4} μm (1.02 ± 3%), max {max:.4} μm (1.78 ± 3%), {:.3} s (< 1 s)", t.as_secs_f64()),
    )
}

fn random_phases(rng: &mut ChaCha8Rng) -> GatePhases {
    let alpha = DMatrix::from_fn(3, 3, |_, _| {
        Complex64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))
    });
    let mut phi = DMatrix::zeros(3, 3);
    for i in 0..3 {
        for m in (i + 1)..3 {
            let v = rng.random_range(-1.0..1.0);
            phi[(i, m)] = v;
            phi[(m, i)] = v;
        }
    }
    GatePhases { alpha, phi }
}

fn physical_phases(rng: &mut ChaCha8Rng) -> GatePhases {
    let trap = TrapConfig::new(3, REFERENCE_OMEGA_Z, 10.0).unwrap();
    let modes = transverse_mode_spectrum(&chain_geometry(&trap).unwrap(), &trap).unwrap();
    let freqs = modes.frequencies_over_omega_z();
    let mu = loop {
        let mu: f64 = rng.random_range(9.0..10.5);
        if freqs.iter().all(|w| (w - mu).abs() > 0.05) {
            break mu;
        }
    };
    let rabi = EffectiveRabiVector {
        values: (0..3).map(|_| Complex64::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2))).collect(),
    };
    let eta = modes.lamb_dicke_scaled(0.1);
    gate_phases(&rabi, &modes, &eta, mu, 2.0 * PI * rng.random_range(5.0..40.0)).unwrap()
}

fn fidelity_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pairs = [(0, 1), (1, 2), (0, 2)];
    let mut worst: f64 = 0.0;
    for draw in 0..50 {
        let phases = if draw % 2 == 0 { random_phases(&mut rng) } else { physical_phases(&mut rng) };
        let occ: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..=1.0)).collect();
        let pair = pairs[draw % 3];
        let closed = gate_fidelity(&phases, &occ, pair).fidelity;
        let brute = fock_fidelity(&phases, &occ, pair, 32);
        worst = worst.max((closed - brute).abs());
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-6 && within_budget(t, 300.0),
        format!("max |F_closed - F_fock| over 50 draws = {worst:.2e} (< 1e-6), {:.1} s (< 5 min)", t.as_secs_f64()),
    )
}

fn infidelity(pair: (usize, usize), mu: f64, addressing: Addressing) -> f64 {
    let config = GateConfig {
        pair,
        detuning: mu,
        tau_periods: 180.0,
        rabi: (1.0, 1.0),
        addressing,
        eta_com: 0.1,
    };
    let setup = GateSetup::new(&TrapConfig::default(), &config).unwrap();
    optimize_rabi(&setup.model(mu), &OptimizerBudget::default()).infidelity
}

fn crosstalk_trend() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, pair, mu, max) in [("centre", (9, 10), 9.9888, 8), ("edge", (0, 1), 9.9387, 3)] {
        let curve: Vec<f64> = (0..=max)
            .map(|n| infidelity(pair, mu, Addressing::Refocused { waist_rel: 1.15, n_corr: n }))
            .collect();
        let baseline = infidelity(pair, mu, Addressing::Perfect);
        let decreasing = curve.windows(2).all(|w| w[1] < w[0]);
        let drop = curve[0] / curve[max];
        let saturated = curve[max] < 3.0 * baseline;
        pass &= decreasing && drop >= 100.0 && saturated;
        parts.push(format!(
            "{label}: δF {:.3e} -> {:.3e}, strictly decreasing {decreasing}, drop {drop:.1}x (>= 100x), baseline {baseline:.3e} (within 3x {saturated})",
            curve[0], curve[max]
        ));
    }
    let t = start.elapsed();
    pass &= within_budget(t, 1800.0);
    outcome(pass, format!("{}; {:.1} s (< 30 min)", parts.join("; "), t.as_secs_f64()))
}

fn noise_robustness() -> Outcome {
    let start = Instant::now();
    let u = equilibrium_positions(21).unwrap().dimensionless;
    let w = u[11] - u[10];
    let lattice = QubitLattice::new(u, w).unwrap();
    let m = build_site_centered_matrix(&lattice, &BeamProfile::gaussian(w).unwrap()).unwrap();
    let f = solve_envelope_exact(&m, 10).unwrap();
    let g = monte_carlo_grid(&m, &f, &[0.0, 0.05], &[0.0, 0.2], 5000, 1).unwrap();
    let (at, se) = g.cell(1, 1);
    let zero = g.cell(0, 0).0;
    let t = start.elapsed();
    outcome(
        at < 0.01 && zero == 0.0 && within_budget(t, 120.0),
        format!("ε̄(0.05, 0.2) = {at:.5} ± {se:.1e} (< 0.01), ε̄(0, 0) = {zero} (= 0), {:.2} s (< 2 min)", t.as_secs_f64()),
    )
}

fn thermal_fluctuations() -> Outcome {
    let start = Instant::now();
    let trap = TrapConfig::new(21, REFERENCE_OMEGA_Z, 10.0).unwrap();
    let fl = doppler_position_std(&trap).unwrap();
    let lo = fl.sigma.iter().copied().fold(f64::INFINITY, f64::min) * 1e9;
    let hi = fl.sigma.iter().copied().fold(0.0, f64::max) * 1e9;
    let com = fl.com_occupation();
    let t = start.elapsed();
    outcome(
        lo >= 6.0 && hi <= 11.0 && (com - 10.0).abs() <= 1.0 && within_budget(t, 1.0),
        format!("σ_i in [{lo:.2}, {hi:.2}] nm (within [6, 11]), COM n̄ = {com:.3} (10 ± 1), {:.3} s (< 1 s)", t.as_secs_f64()),
    )
}

fn spectral_refocusing() -> Outcome {
    let start = Instant::now();
    let u = equilibrium_positions(21).unwrap().dimensionless;
    let a_min = u.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let waves = PlaneWaveSet::brillouin_grid(21, a_min, 100.0).unwrap();
    let m = plane_wave_matrix(&u, &waves).unwrap();
    let mut worst: f64 = 0.0;
    for target in 0..21 {
        let amps = solve_spectral_amplitudes(&m, target).unwrap();
        let g = m.apply(&amps.amplitudes);
        for (n, v) in g.iter().enumerate() {
            worst = worst.max((v - if n == target { 1.0 } else { 0.0 }).norm());
        }
    }
    let theta = max_tilt_angle(2.0 * PI / 0.4, 5.0).unwrap().theta_max;
    let t = start.elapsed();
    outcome(
        worst < 1e-10 && (theta - 0.04).abs() <= 0.002 && within_budget(t, 5.0),
        format!(
            "max site error over 21 targets {worst:.2e} (< 1e-10), θ_m = {theta:.5} rad (0.04 ± 0.002), {:.3} s (< 5 s)",
            t.as_secs_f64()
        ),
    )
}

fn determinism() -> Outcome {
    let u = equilibrium_positions(21).unwrap().dimensionless;
    let w = u[11] - u[10];
    let m = build_site_centered_matrix(&QubitLattice::new(u, w).unwrap(), &BeamProfile::gaussian(w).unwrap()).unwrap();
    let f = solve_envelope_exact(&m, 10).unwrap();
    let run = || monte_carlo_grid(&m, &f, &axis(0.1, 6).unwrap(), &axis(0.4, 6).unwrap(), 1000, 42).unwrap();
    let (a, b) = (run(), run());
    let identical = a
        .mean
        .iter()
        .flatten()
        .chain(a.standard_error.iter().flatten())
        .zip(b.mean.iter().flatten().chain(b.standard_error.iter().flatten()))
        .all(|(x, y)| x.to_bits() == y.to_bits());
    outcome(identical, format!("two seeded 6x6 grids of 1000 samples bit-identical: {identical}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("toy-model exactness", toy_model_exactness),
        ("envelope decay", envelope_decay),
        ("f(0) approximations", f0_approximations),
        ("polynomial root theory", root_theory),
        ("truncation scaling", truncation_scaling),
        ("ion chain numbers", chain_numbers),
        ("fidelity oracle equivalence", fidelity_oracle),
        ("crosstalk reduction trend", crosstalk_trend),
        ("noise robustness", noise_robustness),
        ("thermal fluctuations", thermal_fluctuations),
        ("spectral refocusing", spectral_refocusing),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {name}: {status} - {}", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
