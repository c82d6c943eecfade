use refocus_core::envelope::{
    build_site_centered_matrix, solve_envelope_exact, AddressingMatrix, BeamProfile, EnvelopeSolution, QubitLattice,
};
use refocus_core::gate::{optimize_rabi, Addressing, GateConfig, GateSetup, OptimizerBudget};
use refocus_core::ionchain::{equilibrium_positions, TrapConfig};
use refocus_core::noise::{axis, gate_under_noise, monte_carlo_grid, BeamErrorModel, NoiseGrid, NoisyGate};

fn reference() -> (AddressingMatrix, EnvelopeSolution) {
    let u = equilibrium_positions(21).unwrap().dimensionless;
    let w = u[11] - u[10];
    let lattice = QubitLattice::new(u, w).unwrap();
    let m = build_site_centered_matrix(&lattice, &BeamProfile::gaussian(w).unwrap()).unwrap();
    let f = solve_envelope_exact(&m, 10).unwrap();
    (m, f)
}

/// Coefficient of determination of a least-squares fit `y ≈ Σ c_k x^p_k`.
fn r_squared(x: &[f64], y: &[f64], powers: &[i32]) -> f64 {
    let a = nalgebra::DMatrix::from_fn(x.len(), powers.len(), |i, k| x[i].powi(powers[k]));
    let b = nalgebra::DVector::from_column_slice(y);
    let c = a.clone().svd(true, true).solve(&b, 1e-14).unwrap();
    let resid = (&a * c - &b).norm_squared();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let total: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    1.0 - resid / total
}

fn small_grid() -> NoiseGrid {
    let (m, f) = reference();
    monte_carlo_grid(&m, &f, &axis(0.02, 9).unwrap(), &axis(0.05, 9).unwrap(), 5000, 11).unwrap()
}

#[test]
fn phase_error_grows_quadratically() {
    let g = small_grid();
    let y = &g.mean[0];
    assert!(r_squared(&g.phase_axis, y, &[2]) > 0.95);
    assert!(r_squared(&g.phase_axis, y, &[2]) > 0.999);
}

#[test]
fn amplitude_error_grows_linearly() {
    // The target intensity changes at first order in r, so the mean absolute
    // change is linear in the amplitude spread.
    let g = small_grid();
    let y: Vec<f64> = g.mean.iter().map(|row| row[0]).collect();
    assert!(r_squared(&g.amplitude_axis, &y, &[1]) > 0.999);
    assert!(r_squared(&g.amplitude_axis, &y, &[2]) < 0.95);
}

#[test]
fn amplitude_and_phase_errors_trade_off() {
    // Some phase spread produces the same damage as Δr = 0.05.
    let (m, f) = reference();
    let g = monte_carlo_grid(&m, &f, &[0.05], &axis(1.0, 41).unwrap(), 2000, 5).unwrap();
    let target = g.mean[0][0];
    let row: Vec<f64> = (0..41).map(|p| monte_carlo_grid(&m, &f, &[0.0], &[g.phase_axis[p]], 2000, 5).unwrap().mean[0][0]).collect();
    let k = row.iter().position(|&e| e >= target).expect("phase axis reaches the amplitude damage");
    assert!(k > 0 && row[k - 1] < target);
}

#[test]
fn mean_error_is_non_decreasing_along_each_axis() {
    let (m, f) = reference();
    let g = monte_carlo_grid(&m, &f, &axis(0.1, 11).unwrap(), &axis(0.4, 11).unwrap(), 2000, 2).unwrap();
    for a in 0..11 {
        for p in 0..11 {
            let (e, se) = g.cell(a, p);
            assert!(e >= 0.0);
            if a > 0 {
                let (prev, pse) = g.cell(a - 1, p);
                assert!(e >= prev - 2.0 * (se + pse), "Δr axis at ({a}, {p})");
            }
            if p > 0 {
                let (prev, pse) = g.cell(a, p - 1);
                assert!(e >= prev - 2.0 * (se + pse), "Δφ axis at ({a}, {p})");
            }
        }
    }
}

#[test]
fn standard_error_converges_on_the_default_grid() {
    let (m, f) = reference();
    let g = monte_carlo_grid(&m, &f, &axis(0.1, 21).unwrap(), &axis(0.4, 21).unwrap(), 5000, 1).unwrap();
    for a in 0..21 {
        for p in 0..21 {
            let (e, se) = g.cell(a, p);
            if e > 1e-4 {
                assert!(se < 0.05 * e, "cell ({a}, {p}): {e} ± {se}");
            }
        }
    }
}

fn noisy_gate(pair: (usize, usize), mu: f64, n_corr: usize, dr: f64) -> NoisyGate {
    let config = GateConfig {
        pair,
        detuning: mu,
        tau_periods: 180.0,
        rabi: (1.0, 1.0),
        addressing: Addressing::Refocused { waist_rel: 1.15, n_corr },
        eta_com: 0.1,
    };
    let setup = GateSetup::new(&TrapConfig::default(), &config).unwrap();
    let opt = optimize_rabi(&setup.model(mu), &OptimizerBudget::default());
    let model = BeamErrorModel {
        amplitude_std: dr,
        phase_std: 4.0 * dr,
        samples: 200,
        seed: 3,
    };
    gate_under_noise(&setup, mu, (opt.rabi_j, opt.rabi_n), &model).unwrap()
}

#[test]
fn one_percent_intensity_error_costs_order_1e2_infidelity() {
    // Centre pair with eight correction beams; secant search on the error
    // scale for a 1% mean intensity error.
    let eps = |dr: f64| noisy_gate((9, 10), 9.9888, 8, dr);
    let (mut x0, mut x1) = (0.02, 0.04);
    let (mut e0, mut r) = (eps(x0).mean_intensity_error - 0.01, eps(x1));
    for _ in 0..6 {
        let e1 = r.mean_intensity_error - 0.01;
        if e1.abs() < 5e-4 {
            break;
        }
        let x2 = x1 - e1 * (x1 - x0) / (e1 - e0);
        (x0, e0, x1) = (x1, e1, x2);
        r = eps(x1);
    }
    assert!((r.mean_intensity_error - 0.01).abs() < 1e-3, "ε̄ = {}", r.mean_intensity_error);
    let induced = r.mean_infidelity - r.ideal_infidelity;
    assert!((1e-3..1e-1).contains(&induced), "induced infidelity {induced}");
}

#[test]
fn edge_pair_is_more_robust_than_centre_pair() {
    let centre = noisy_gate((9, 10), 9.9888, 8, 0.01);
    let edge = noisy_gate((0, 1), 9.9387, 5, 0.01);
    let dc = centre.mean_infidelity - centre.ideal_infidelity;
    let de = edge.mean_infidelity - edge.ideal_infidelity;
    assert!(de > 0.0 && dc > 3.0 * de, "centre {dc}, edge {de}");
}

#[test]
fn noiseless_gate_matches_ideal() {
    let r = noisy_gate((9, 10), 9.9888, 4, 0.0);
    assert_eq!(r.mean_infidelity, r.ideal_infidelity);
    assert_eq!(r.mean_intensity_error, 0.0);
}
