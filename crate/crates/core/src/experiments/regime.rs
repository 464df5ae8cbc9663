use serde::{Deserialize, Serialize};

use super::{
    event_disordered, event_quasispecies, horizon, simulate_series, Levels, ReplicaReport,
    StoppingTimes,
};
use crate::error::{Error, Result};
use crate::ga::{Operators, Population};
use crate::landscape::LandscapeSpec;
use crate::rng::{mix64, replicate};
use crate::stats::{mean_sd, Proportion};

/// `p_M` solving `ratio (1 - p_C)(1 - p_M)^ell = pi`.
pub fn solve_pm(pi: f64, ratio: f64, p_c: f64, ell: usize) -> Result<f64> {
    let keep = pi / (ratio * (1.0 - p_c));
    if !(keep > 0.0 && keep <= 1.0) || ell == 0 {
        return Err(Error::Precondition(format!(
            "no p_M in [0, 1] gives pi = {pi}: need 0 < pi <= {} (ratio {ratio}, p_C = {p_c})",
            ratio * (1.0 - p_c)
        )));
    }
    Ok(1.0 - keep.powf(1.0 / ell as f64))
}

/// `p_M` solving `2 (1 - p_C)(1 - p_M)^ell = pi`.
pub fn disordered_pm(pi: f64, p_c: f64, ell: usize) -> Result<f64> {
    solve_pm(pi, 2.0, p_c, ell)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Disordered,
    Quasispecies,
}

/// Everything a replicated regime run needs.
#[derive(Debug, Clone)]
pub struct RegimeSetup {
    pub landscape: LandscapeSpec,
    pub initial: Population,
    pub pi: f64,
    pub p_c: f64,
    pub p_m: f64,
    pub kappa: f64,
    pub replicas: usize,
    pub seed: u64,
}

impl RegimeSetup {
    /// Sharp peak with `ell = m`, one Master sequence and `m - 1` zeros, and
    /// `p_M` from the fitness ratio 2.
    pub fn sharp_peak_ratio_two(
        pi: f64,
        m: usize,
        p_c: f64,
        kappa: f64,
        replicas: usize,
        seed: u64,
    ) -> Result<Self> {
        let landscape = LandscapeSpec::sharp_peak(m)?;
        let initial = Population::sharp_peak_initial(m, &landscape)?;
        let p_m = disordered_pm(pi, p_c, m)?;
        Ok(RegimeSetup {
            landscape,
            initial,
            pi,
            p_c,
            p_m,
            kappa,
            replicas,
            seed,
        })
    }

    /// `p_M` from the realised ratio `f0* / f_bar0` of `initial`.
    pub fn with_population(
        landscape: LandscapeSpec,
        initial: Population,
        pi: f64,
        p_c: f64,
        kappa: f64,
        replicas: usize,
        seed: u64,
    ) -> Result<Self> {
        let s = initial.stats(0.0);
        let ratio = s.f_star / s.f_bar;
        if ratio <= 1.0 {
            return Err(Error::Precondition(format!(
                "initial population is flat (f* = f_bar = {}), so pi cannot exceed 1",
                s.f_bar
            )));
        }
        let p_m = solve_pm(pi, ratio, p_c, landscape.ell())?;
        Ok(RegimeSetup {
            landscape,
            initial,
            pi,
            p_c,
            p_m,
            kappa,
            replicas,
            seed,
        })
    }

    pub fn m(&self) -> usize {
        self.initial.len()
    }

    pub fn ell(&self) -> usize {
        self.landscape.ell()
    }

    pub fn horizon(&self) -> usize {
        horizon(self.kappa, self.m())
    }

    pub fn levels(&self) -> Levels {
        Levels::new(self.m(), self.ell(), self.pi, self.initial.stats(0.0).f_bar)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub protocol: Protocol,
    pub m: usize,
    pub ell: usize,
    pub pi: f64,
    pub p_c: f64,
    pub p_m: f64,
    pub kappa: f64,
    pub horizon: usize,
    pub seed: u64,
    pub f_star0: f64,
    pub f_bar0: f64,
    /// Frequency of the protocol's own event.
    pub frequency: Proportion,
    pub disordered: Proportion,
    pub quasispecies: Proportion,
    /// Mean and sample sd of `f_bar_n` across replicas, `n = 0..=horizon`.
    pub f_bar_mean: Vec<f64>,
    pub f_bar_sd: Vec<f64>,
    #[serde(skip)]
    pub replicas: Vec<ReplicaReport>,
}

/// Runs every replica of `setup` and aggregates both events.
pub fn simulate_regime(setup: &RegimeSetup, protocol: Protocol) -> Result<RegimeReport> {
    let ops = Operators::new(setup.p_c, setup.p_m)?;
    let h = setup.horizon();
    let levels = setup.levels();
    let m = setup.m();
    let runs = replicate(setup.seed, setup.replicas, |r, rng| {
        let series = simulate_series(&setup.landscape, &setup.initial, &ops, h, rng)?;
        let times = StoppingTimes::scan(&series, &levels);
        Ok(ReplicaReport {
            replica: r,
            seed: mix64(setup.seed, r as u64),
            event_disordered: event_disordered(&series, &times, m, h),
            event_quasispecies: event_quasispecies(&series, &times, h),
            series,
            times,
        })
    });
    let replicas: Vec<ReplicaReport> = runs.into_iter().collect::<Result<_>>()?;
    let count = |f: fn(&ReplicaReport) -> bool| replicas.iter().filter(|r| f(r)).count();
    let disordered = Proportion::wilson(count(|r| r.event_disordered), replicas.len(), 0.95);
    let quasispecies = Proportion::wilson(count(|r| r.event_quasispecies), replicas.len(), 0.95);
    let (f_bar_mean, f_bar_sd) = (0..=h)
        .map(|n| {
            let values: Vec<f64> = replicas.iter().map(|r| r.series[n].f_bar).collect();
            mean_sd(&values)
        })
        .unzip();
    let s0 = setup.initial.stats(0.0);
    Ok(RegimeReport {
        protocol,
        m,
        ell: setup.ell(),
        pi: setup.pi,
        p_c: setup.p_c,
        p_m: setup.p_m,
        kappa: setup.kappa,
        horizon: h,
        seed: setup.seed,
        f_star0: s0.f_star,
        f_bar0: s0.f_bar,
        frequency: match protocol {
            Protocol::Disordered => disordered,
            Protocol::Quasispecies => quasispecies,
        },
        disordered,
        quasispecies,
        f_bar_mean,
        f_bar_sd,
        replicas,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderedConfig {
    pub pi: f64,
    pub m: usize,
    pub p_c: f64,
    pub kappa: f64,
    pub replicas: usize,
    pub seed: u64,
}

/// Sharp peak with `ell = m` and `pi < 1`.
pub fn run_disordered(cfg: &DisorderedConfig) -> Result<RegimeReport> {
    if !(cfg.pi > 0.0 && cfg.pi < 1.0) {
        return Err(Error::Precondition(format!(
            "disordered runs need 0 < pi < 1, got {}",
            cfg.pi
        )));
    }
    let setup = RegimeSetup::sharp_peak_ratio_two(
        cfg.pi,
        cfg.m,
        cfg.p_c,
        cfg.kappa,
        cfg.replicas,
        cfg.seed,
    )?;
    simulate_regime(&setup, Protocol::Disordered)
}

#[derive(Debug, Clone)]
pub struct QuasispeciesConfig {
    pub pi: f64,
    pub p_c: f64,
    pub kappa: f64,
    pub replicas: usize,
    pub seed: u64,
    pub landscape: LandscapeSpec,
    /// Defaults to one Master sequence and `m - 1` zeros.
    pub initial: Option<Population>,
    pub m: usize,
}

/// `pi > 1` from a population whose best fitness exceeds its mean.
pub fn run_quasispecies(cfg: &QuasispeciesConfig) -> Result<RegimeReport> {
    if !(cfg.pi > 1.0) {
        return Err(Error::Precondition(format!(
            "quasispecies runs need pi > 1, got {}",
            cfg.pi
        )));
    }
    let initial = match &cfg.initial {
        Some(p) => p.clone(),
        None => Population::sharp_peak_initial(cfg.m, &cfg.landscape)?,
    };
    let setup = RegimeSetup::with_population(
        cfg.landscape.clone(),
        initial,
        cfg.pi,
        cfg.p_c,
        cfg.kappa,
        cfg.replicas,
        cfg.seed,
    )?;
    simulate_regime(&setup, Protocol::Quasispecies)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub pi: f64,
    pub m: usize,
    pub disordered: Proportion,
    pub quasispecies: Proportion,
}

/// One row per `pi` on the sharp peak with `ell = m`: the disordered
/// protocol below 1, the quasispecies protocol from 1 up. All rows share
/// the master seed.
pub fn pi_sweep(
    m: usize,
    p_c: f64,
    grid: &[f64],
    kappa: f64,
    replicas: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let landscape = LandscapeSpec::sharp_peak(m)?;
    let initial = Population::sharp_peak_initial(m, &landscape)?;
    grid.iter()
        .map(|&pi| {
            let (setup, protocol) = if pi < 1.0 {
                (
                    RegimeSetup::sharp_peak_ratio_two(pi, m, p_c, kappa, replicas, seed)?,
                    Protocol::Disordered,
                )
            } else {
                let setup = RegimeSetup::with_population(
                    landscape.clone(),
                    initial.clone(),
                    pi,
                    p_c,
                    kappa,
                    replicas,
                    seed,
                )?;
                (setup, Protocol::Quasispecies)
            };
            let report = simulate_regime(&setup, protocol)?;
            Ok(SweepRow {
                pi,
                m,
                disordered: report.disordered,
                quasispecies: report.quasispecies,
            })
        })
        .collect()
}
