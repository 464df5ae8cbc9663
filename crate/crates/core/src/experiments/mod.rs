//! Replicated GA experiments: the two regime protocols, the `pi` sweep and
//! the numerical checks of every dominance relation between the GA and its
//! auxiliary processes.
//!
//! Every replica runs on `substream(seed, replica)`, so a report is a pure
//! function of its configuration and master seed.

mod dominance;
mod regime;

pub use dominance::*;
pub use regime::*;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ga::{next_generation_traced, Operators, Population};
use crate::landscape::LandscapeSpec;

/// `ceil(kappa ln m)`.
pub fn horizon(kappa: f64, m: usize) -> usize {
    (kappa * (m as f64).ln()).ceil().max(0.0) as usize
}

/// Statistics of one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub gen: usize,
    pub f_star: f64,
    pub f_bar: f64,
    /// `N*_n`, exact Master sequences.
    pub n_master: usize,
    /// `T_n`, chromosomes in the progeny of the initial Master sequence.
    pub n_descendants: usize,
    /// Chromosomes with fitness at least the initial maximum.
    pub n_at_least: usize,
    /// `D_n`, most ones on a chromosome outside the progeny (0 if none).
    pub d_max: usize,
    /// `A_{n-1}`: flagged parents selected to build this generation.
    pub selected_descendants: usize,
    /// Largest flip count on a single child when building this generation.
    pub max_mutations: usize,
}

/// Runs `horizon` generations from `initial`, recording generation 0 too.
pub fn simulate_series<R: Rng + ?Sized>(
    landscape: &LandscapeSpec,
    initial: &Population,
    ops: &Operators,
    horizon: usize,
    rng: &mut R,
) -> Result<Vec<GenerationRecord>> {
    let reference = initial.stats(0.0).f_star;
    let record = |pop: &Population, selected: usize, flips: usize| {
        let s = pop.stats(reference);
        GenerationRecord {
            gen: pop.generation(),
            f_star: s.f_star,
            f_bar: s.f_bar,
            n_master: s.n_master,
            n_descendants: s.n_descendants,
            n_at_least: s.n_at_least,
            d_max: pop.max_ones_non_descendant(),
            selected_descendants: selected,
            max_mutations: flips,
        }
    };
    let mut series = Vec::with_capacity(horizon + 1);
    series.push(record(initial, 0, 0));
    let mut pop = initial.clone();
    for _ in 0..horizon {
        let (next, trace) = next_generation_traced(&pop, landscape, ops, rng)?;
        series.push(record(
            &next,
            trace.selected_descendants,
            trace.max_mutations,
        ));
        pop = next;
    }
    Ok(series)
}

/// Levels defining the stopping times of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Levels {
    /// `m^{1/4}`, crossed by `T_n` at `tau1`.
    pub descendants: f64,
    /// `sqrt(ell)`, reached by `D_n` at `tau2`.
    pub ones: f64,
    /// `sqrt(pi) f_bar0`, reached by the mean fitness at `tau_bar`.
    pub mean_fitness: f64,
    /// `m / sqrt(pi)`, reached by the count of chromosomes at least as fit
    /// as the initial best one at `tau_star`.
    pub best_count: f64,
}

impl Levels {
    pub fn new(m: usize, ell: usize, pi: f64, f_bar0: f64) -> Self {
        Levels {
            descendants: (m as f64).powf(0.25),
            ones: (ell as f64).sqrt(),
            mean_fitness: pi.sqrt() * f_bar0,
            best_count: m as f64 / pi.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingTimes {
    /// First `n >= 1` with no Master sequence.
    pub tau0: Option<usize>,
    /// First `n >= 1` with `T_n > m^{1/4}`.
    pub tau1: Option<usize>,
    /// First `n >= 1` with `D_n >= sqrt(ell)`.
    pub tau2: Option<usize>,
    /// First `n >= 1` with `f_bar_n >= sqrt(pi) f_bar0`.
    pub tau_bar: Option<usize>,
    /// First `n >= 0` with at least `m / sqrt(pi)` chromosomes as fit as the
    /// initial best one.
    pub tau_star: Option<usize>,
}

impl StoppingTimes {
    pub fn scan(series: &[GenerationRecord], levels: &Levels) -> Self {
        let first = |from: usize, hit: &dyn Fn(&GenerationRecord) -> bool| {
            series.iter().skip(from).find(|r| hit(r)).map(|r| r.gen)
        };
        StoppingTimes {
            tau0: first(1, &|r| r.n_master == 0),
            tau1: first(1, &|r| r.n_descendants as f64 > levels.descendants),
            tau2: first(1, &|r| r.d_max as f64 >= levels.ones),
            tau_bar: first(1, &|r| r.f_bar >= levels.mean_fitness),
            tau_star: first(0, &|r| r.n_at_least as f64 >= levels.best_count),
        }
    }
}

/// Master lost by `horizon` while the mean fitness never exceeds
/// `f_bar0 (1 + 1/sqrt(m))` up to `horizon`.
pub fn event_disordered(
    series: &[GenerationRecord],
    times: &StoppingTimes,
    m: usize,
    horizon: usize,
) -> bool {
    let f_bar0 = series[0].f_bar;
    let cap = f_bar0 * (1.0 + 1.0 / (m as f64).sqrt());
    times.tau0.is_some_and(|t| t <= horizon)
        && series.iter().take(horizon + 1).all(|r| r.f_bar <= cap)
}

/// Best fitness never below the initial one up to `horizon`, and the mean
/// fitness reaches `sqrt(pi) f_bar0` by `horizon`.
pub fn event_quasispecies(
    series: &[GenerationRecord],
    times: &StoppingTimes,
    horizon: usize,
) -> bool {
    let f_star0 = series[0].f_star;
    series.iter().take(horizon + 1).all(|r| r.f_star >= f_star0)
        && times.tau_bar.is_some_and(|t| t <= horizon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaReport {
    pub replica: usize,
    /// Seed of the replica's substream.
    pub seed: u64,
    pub series: Vec<GenerationRecord>,
    pub times: StoppingTimes,
    pub event_disordered: bool,
    pub event_quasispecies: bool,
}
