use serde::{Deserialize, Serialize};

use refocus_core::gate::{
    optimize_rabi, scan_detuning, Addressing, GateConfig, GateSetup, OptimizerBudget, ScanPoint, DEFAULT_ETA_COM,
    DEFAULT_TAU_PERIODS,
};
use refocus_core::ionchain::{TrapConfig, REFERENCE_OMEGA_Z};

use super::{file_name, positive, sidecar};
use crate::config::merge_options;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Sink};

pub const DEFAULT_WAIST_REL: f64 = 1.15;

#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateArgs {
    /// Number of ions.
    #[arg(long)]
    pub ions: Option<usize>,
    /// Transverse to axial frequency ratio.
    #[arg(long)]
    pub anisotropy: Option<f64>,
    /// Target ions as `j,n`, zero-based (default: the centre pair).
    #[arg(long)]
    pub pair: Option<String>,
    /// Gate duration in axial trap periods.
    #[arg(long)]
    pub tau_periods: Option<f64>,
    /// Lower end of the detuning scan, in units of the axial frequency.
    #[arg(long)]
    pub mu_min: Option<f64>,
    #[arg(long)]
    pub mu_max: Option<f64>,
    #[arg(long)]
    pub mu_steps: Option<usize>,
    /// Number of correction beams on the ions nearest the pair.
    #[arg(long)]
    pub ncorr: Option<usize>,
    /// Gaussian waist relative to the smallest ion spacing.
    #[arg(long)]
    pub waist_rel: Option<f64>,
    /// Illuminate only the target ions.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub perfect: Option<bool>,
    /// Lamb-Dicke parameter of the centre-of-mass transverse mode.
    #[arg(long)]
    pub eta_com: Option<f64>,
    /// Upper bound on each drive amplitude, in units of the axial frequency.
    #[arg(long)]
    pub max_rabi: Option<f64>,
    /// Output CSV (default gate.csv).
    #[arg(long)]
    pub out: Option<String>,
}

merge_options!(GateArgs {
    ions, anisotropy, pair, tau_periods, mu_min, mu_max, mu_steps, ncorr, waist_rel, perfect, eta_com, max_rabi, out
});

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateParams {
    pub ions: usize,
    pub anisotropy: f64,
    pub pair: (usize, usize),
    pub tau_periods: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_steps: usize,
    pub ncorr: usize,
    pub waist_rel: f64,
    pub perfect: bool,
    pub eta_com: f64,
    pub max_rabi: Option<f64>,
    pub out: String,
}

pub fn parse_pair(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Usage(format!("--pair expects two ion indices like `9,10`, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

impl GateArgs {
    pub fn resolve(self) -> CliResult<GateParams> {
        let ions = self.ions.unwrap_or(20);
        let pair = match &self.pair {
            Some(s) => parse_pair(s)?,
            None => (ions.saturating_sub(1) / 2, ions / 2 + usize::from(ions % 2 == 1)),
        };
        Ok(GateParams {
            ions,
            anisotropy: self.anisotropy.unwrap_or(10.0),
            pair,
            tau_periods: self.tau_periods.unwrap_or(DEFAULT_TAU_PERIODS),
            mu_min: self.mu_min.unwrap_or(9.90),
            mu_max: self.mu_max.unwrap_or(10.05),
            mu_steps: self.mu_steps.unwrap_or(31),
            ncorr: self.ncorr.unwrap_or(0),
            waist_rel: self.waist_rel.unwrap_or(DEFAULT_WAIST_REL),
            perfect: self.perfect.unwrap_or(false),
            eta_com: self.eta_com.unwrap_or(DEFAULT_ETA_COM),
            max_rabi: self.max_rabi,
            out: self.out.unwrap_or_else(|| "gate.csv".into()),
        })
    }
}

#[derive(Serialize)]
struct GateSummary {
    best_mu: f64,
    best_infidelity: f64,
    best_rabi: (f64, f64),
    baseline_infidelity: f64,
    correction_beams: Vec<usize>,
    stagnated_points: usize,
}

/// Evenly spaced detunings, inclusive of both ends.
pub fn mu_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![min];
    }
    (0..steps).map(|i| min + (max - min) * i as f64 / (steps - 1) as f64).collect()
}

impl GateParams {
    pub fn validate(&self) -> CliResult<()> {
        if self.ions < 2 {
            return Err(CliError::Usage(format!("--ions must be at least 2, got {}", self.ions)));
        }
        positive("anisotropy", self.anisotropy)?;
        positive("tau-periods", self.tau_periods)?;
        positive("mu-min", self.mu_min)?;
        positive("waist-rel", self.waist_rel)?;
        positive("eta-com", self.eta_com)?;
        if let Some(m) = self.max_rabi {
            positive("max-rabi", m)?;
        }
        if !(self.mu_max >= self.mu_min) || self.mu_steps == 0 {
            return Err(CliError::Usage("need --mu-max ≥ --mu-min and --mu-steps ≥ 1".into()));
        }
        let (j, n) = self.pair;
        if j == n || j >= self.ions || n >= self.ions {
            return Err(CliError::Usage(format!(
                "--pair needs two distinct ions below {}, got {j},{n}",
                self.ions
            )));
        }
        if !self.perfect && self.ncorr + 2 > self.ions {
            return Err(CliError::Usage(format!("--ncorr {} leaves no room in {} ions", self.ncorr, self.ions)));
        }
        Ok(())
    }

    pub fn trap(&self) -> CliResult<TrapConfig> {
        Ok(TrapConfig::new(self.ions, REFERENCE_OMEGA_Z, self.anisotropy)?)
    }

    pub fn config(&self, addressing: Addressing) -> GateConfig {
        GateConfig {
            pair: self.pair,
            detuning: self.mu_min,
            tau_periods: self.tau_periods,
            rabi: (1.0, 1.0),
            addressing,
            eta_com: self.eta_com,
        }
    }

    pub fn addressing(&self) -> Addressing {
        if self.perfect {
            Addressing::Perfect
        } else {
            Addressing::Refocused {
                waist_rel: self.waist_rel,
                n_corr: self.ncorr,
            }
        }
    }

    pub fn budget(&self) -> OptimizerBudget {
        OptimizerBudget {
            max_rabi: self.max_rabi,
            ..OptimizerBudget::default()
        }
    }

    pub fn scan(&self) -> CliResult<(GateSetup, Vec<ScanPoint>)> {
        let setup = GateSetup::new(&self.trap()?, &self.config(self.addressing()))?;
        let points = scan_detuning(&setup, &mu_grid(self.mu_min, self.mu_max, self.mu_steps), &self.budget());
        Ok((setup, points))
    }

    pub fn run(&self, sink: &mut Sink) -> CliResult<Vec<String>> {
        let (setup, points) = self.scan()?;
        let best = points
            .iter()
            .filter(|p| p.infidelity.is_finite())
            .min_by(|a, b| a.infidelity.total_cmp(&b.infidelity))
            .copied()
            .ok_or(refocus_core::Error::NonFinite { context: "gate infidelity scan" })?;
        let perfect = GateSetup::new(&self.trap()?, &self.config(Addressing::Perfect))?;
        let baseline = optimize_rabi(&perfect.model(best.mu), &self.budget());
        let rows = points.iter().map(|p| {
            vec![Cell::from(p.mu), p.rabi_j.into(), p.rabi_n.into(), p.infidelity.into(), p.stagnated.into()]
        });
        sink.csv(&file_name(&self.out), &["mu_over_omega_z", "rabi_j", "rabi_n", "infidelity", "stagnated"], rows)?;
        let mut beams = setup.profiles[0].beam_ions.clone();
        beams.retain(|&i| i != self.pair.0 && i != self.pair.1);
        let summary = GateSummary {
            best_mu: best.mu,
            best_infidelity: best.infidelity,
            best_rabi: (best.rabi_j, best.rabi_n),
            baseline_infidelity: baseline.infidelity,
            correction_beams: if self.perfect { Vec::new() } else { beams },
            stagnated_points: points.iter().filter(|p| p.stagnated).count(),
        };
        sink.json(&sidecar(&self.out), &summary)?;
        Ok(vec![
            ncorr_note(),
            "ion indices are zero-based; drive amplitudes and detuning are in units of the axial frequency".into(),
            "baseline: perfect focusing optimized at the best detuning".into(),
        ])
    }
}

pub fn ncorr_note() -> String {
    "n_corr counts correction beams for the pair: they sit on the n_corr non-target ions nearest either target, \
     and both target envelopes are solved on the targets plus those beams"
        .into()
}
