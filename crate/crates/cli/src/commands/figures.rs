use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use refocus_core::envelope::{f0_large_waist, f0_small_waist, gaussian_chain_envelope, gaussian_gamma};
use refocus_core::gate::{optimize_rabi, Addressing, GateSetup};
use refocus_core::ionchain::{chain_geometry, transverse_mode_spectrum, TrapConfig, REFERENCE_OMEGA_Z};
use refocus_core::noise::DEFAULT_SAMPLES;

use super::gate::{ncorr_note, GateParams, DEFAULT_WAIST_REL};
use super::noise::NoiseArgs;
use super::spectral::SpectralParams;
use crate::config::{merge_options, Settings};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Sink};

pub const CENTER_DETUNING: f64 = 9.9888;
pub const EDGE_DETUNING: f64 = 9.9387;
const GATE_IONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    /// Envelopes on a 401-site chain for w/a = 1.5, 1.0, 0.5.
    Fig1a,
    /// Centre amplitude versus waist with both approximations.
    Fig1b,
    /// Plane-wave refocusing on a 21-ion harmonic chain.
    Fig2,
    /// Gate infidelity versus detuning, centre pair.
    Fig3a,
    /// Gate infidelity versus detuning, edge pair.
    Fig3b,
    /// Gate infidelity versus correction-beam count at fixed detuning.
    Fig3c,
    /// Intensity-error heatmap.
    Fig4,
    All,
}

impl Which {
    fn name(self) -> &'static str {
        match self {
            Which::Fig1a => "fig1a",
            Which::Fig1b => "fig1b",
            Which::Fig2 => "fig2",
            Which::Fig3a => "fig3a",
            Which::Fig3b => "fig3b",
            Which::Fig3c => "fig3c",
            Which::Fig4 => "fig4",
            Which::All => "all",
        }
    }

    fn expand(self) -> Vec<Which> {
        use Which::*;
        match self {
            All => vec![Fig1a, Fig1b, Fig2, Fig3a, Fig3b, Fig3c, Fig4],
            w => vec![w],
        }
    }

    fn long(self) -> bool {
        matches!(self, Which::Fig3a | Which::Fig3b | Which::Fig3c | Which::All)
    }
}

#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiguresArgs {
    /// Dataset to emit.
    #[arg(long, value_enum)]
    pub which: Option<Which>,
    /// Allow the gate datasets, which take minutes.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub confirm_long: Option<bool>,
    /// Detuning points per gate curve.
    #[arg(long)]
    pub mu_steps: Option<usize>,
    /// Monte Carlo samples per heatmap cell.
    #[arg(long)]
    pub samples: Option<usize>,
}

merge_options!(FiguresArgs { which, confirm_long, mu_steps, samples });

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiguresParams {
    pub which: Which,
    pub confirm_long: bool,
    pub mu_steps: usize,
    pub samples: usize,
}

impl FiguresArgs {
    pub fn resolve(self) -> CliResult<FiguresParams> {
        Ok(FiguresParams {
            which: crate::error::require(self.which, "--which")?,
            confirm_long: self.confirm_long.unwrap_or(false),
            mu_steps: self.mu_steps.unwrap_or(400),
            samples: self.samples.unwrap_or(DEFAULT_SAMPLES),
        })
    }
}

fn gate_params(pair: (usize, usize), ncorr: usize, perfect: bool, mu: (f64, f64), steps: usize) -> GateParams {
    GateParams {
        ions: GATE_IONS,
        anisotropy: 10.0,
        pair,
        tau_periods: refocus_core::gate::DEFAULT_TAU_PERIODS,
        mu_min: mu.0,
        mu_max: mu.1,
        mu_steps: steps,
        ncorr,
        waist_rel: DEFAULT_WAIST_REL,
        perfect,
        eta_com: refocus_core::gate::DEFAULT_ETA_COM,
        max_rabi: None,
        out: String::new(),
    }
}

impl FiguresParams {
    pub fn stem(&self) -> &'static str {
        self.which.name()
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.which.long() && !self.confirm_long {
            return Err(CliError::Usage(format!(
                "--which {} runs gate optimizations for several minutes; pass --confirm-long to proceed",
                self.which.name()
            )));
        }
        if self.mu_steps < 2 || self.samples == 0 {
            return Err(CliError::Usage("--mu-steps must be at least 2 and --samples at least 1".into()));
        }
        Ok(())
    }

    pub fn run(&self, sink: &mut Sink, settings: &Settings) -> CliResult<Vec<String>> {
        let mut notes = Vec::new();
        for which in self.which.expand() {
            let note = match which {
                Which::Fig1a => self.fig1a(sink)?,
                Which::Fig1b => self.fig1b(sink)?,
                Which::Fig2 => self.fig2(sink)?,
                Which::Fig3a => self.fig3_scan(sink, "fig3a", (9, 10), &[0, 2, 4, 6, 8])?,
                Which::Fig3b => self.fig3_scan(sink, "fig3b", (0, 1), &[0, 1, 2, 3])?,
                Which::Fig3c => self.fig3c(sink)?,
                Which::Fig4 => self.fig4(sink, settings)?,
                Which::All => unreachable!(),
            };
            notes.push(format!("{}: {note}", which.name()));
        }
        if self.which.long() {
            notes.push(ncorr_note());
        }
        Ok(notes)
    }

    fn fig1a(&self, sink: &mut Sink) -> CliResult<String> {
        for w in [1.5, 1.0, 0.5] {
            let f = gaussian_chain_envelope(w, 401)?;
            let rows = f.amplitudes.iter().enumerate().map(|(j, a)| {
                let offset = j as i64 - f.target as i64;
                vec![Cell::from(offset), a.re.into(), a.norm().into(), a.norm().ln().into()]
            });
            sink.csv(&format!("fig1a_w{w:.1}.csv"), &["offset", "f", "abs_f", "ln_abs_f"], rows)?;
        }
        Ok("envelope of the centre target of a 401-site chain, one file per waist w/a".into())
    }

    fn fig1b(&self, sink: &mut Sink) -> CliResult<String> {
        let mut rows = Vec::new();
        for i in 0..=32 {
            let w = 0.2 + 0.05 * i as f64;
            let exact = gaussian_chain_envelope(w, 201)?.f0().re;
            let small = if w <= 1.0 { f0_small_waist(gaussian_gamma(w)).unwrap_or(f64::NAN) } else { f64::NAN };
            let large = if w >= 1.0 { f0_large_waist(w).unwrap_or(f64::NAN) } else { f64::NAN };
            rows.push(vec![Cell::from(w), exact.into(), small.into(), large.into()]);
        }
        sink.csv("fig1b.csv", &["w_over_a", "f0_exact", "f0_small_w", "f0_large_w"], rows)?;
        Ok("exact centre amplitude on a 201-site chain; approximation columns are empty outside their domain".into())
    }

    fn fig2(&self, sink: &mut Sink) -> CliResult<String> {
        let p = SpectralParams {
            ions: 21,
            target: 10,
            grid_points: 2001,
            wavelength_um: 0.4,
            omega_z_hz: 1.0e6,
            out: "fig2_intensity.csv".into(),
        };
        p.run(sink)?;
        Ok("intensity profile in fig2_intensity.csv, plane-wave amplitudes in fig2_intensity.json".into())
    }

    fn fig3_scan(&self, sink: &mut Sink, name: &str, pair: (usize, usize), counts: &[usize]) -> CliResult<String> {
        let trap = TrapConfig::new(GATE_IONS, REFERENCE_OMEGA_Z, 10.0)?;
        let modes = transverse_mode_spectrum(&chain_geometry(&trap)?, &trap)?;
        let freqs = modes.frequencies_over_omega_z();
        // Covers the three highest modes and both fixed detunings.
        let range = (freqs[2] - 0.03, freqs[0] + 0.02);
        let mut columns = Vec::new();
        let mut header = vec!["mu_over_omega_z".to_string()];
        for &n in counts {
            let (_, pts) = gate_params(pair, n, false, range, self.mu_steps).scan()?;
            columns.push(pts.iter().map(|p| p.infidelity).collect::<Vec<_>>());
            header.push(format!("infidelity_ncorr{n}"));
        }
        let (_, pts) = gate_params(pair, 0, true, range, self.mu_steps).scan()?;
        columns.push(pts.iter().map(|p| p.infidelity).collect());
        header.push("infidelity_perfect".into());
        let rows = pts.iter().enumerate().map(|(i, p)| {
            let mut row = vec![Cell::from(p.mu)];
            row.extend(columns.iter().map(|c| Cell::from(c[i])));
            row
        });
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        sink.csv(&format!("{name}.csv"), &header, rows)?;
        let mode_rows = freqs.iter().enumerate().map(|(k, w)| vec![Cell::from(k), (*w).into()]);
        sink.csv(&format!("{name}_modes.csv"), &["mode", "freq_over_omega_z"], mode_rows)?;
        Ok(format!("pair {},{} of a {GATE_IONS}-ion chain, drive amplitudes optimized at each detuning", pair.0, pair.1))
    }

    fn fig3c(&self, sink: &mut Sink) -> CliResult<String> {
        let mut rows = Vec::new();
        for (label, pair, mu, max) in [("center", (9, 10), CENTER_DETUNING, 8), ("edge", (0, 1), EDGE_DETUNING, 3)] {
            let base = gate_params(pair, 0, true, (mu, mu), 1);
            let trap = base.trap()?;
            let perfect = GateSetup::new(&trap, &base.config(Addressing::Perfect))?;
            let baseline = optimize_rabi(&perfect.model(mu), &base.budget()).infidelity;
            for n in 0..=max {
                let p = gate_params(pair, n, false, (mu, mu), 1);
                let setup = GateSetup::new(&trap, &p.config(p.addressing()))?;
                let opt = optimize_rabi(&setup.model(mu), &p.budget());
                rows.push(vec![Cell::from(label), n.into(), mu.into(), opt.infidelity.into(), baseline.into()]);
            }
        }
        sink.csv(
            "fig3c.csv",
            &["pair", "n_corr", "mu_over_omega_z", "infidelity", "infidelity_perfect"],
            rows,
        )?;
        Ok("centre pair 9,10 and edge pair 0,1 at fixed detuning".into())
    }

    fn fig4(&self, sink: &mut Sink, settings: &Settings) -> CliResult<String> {
        let p = NoiseArgs {
            samples: Some(self.samples),
            out: Some("fig4.csv".into()),
            ..NoiseArgs::default()
        }
        .resolve()?;
        let grid = p.grid(settings.seed)?;
        p.write_grid(sink, "fig4.csv", &grid)?;
        Ok(format!("21-ion chain, centre target, {} samples per cell, seed {}", self.samples, settings.seed))
    }
}
