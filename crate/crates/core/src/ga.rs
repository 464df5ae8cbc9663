//! The simple genetic algorithm: roulette-wheel selection with replacement,
//! single-point crossover, independent per-bit mutation, and the generation
//! cycle that applies them pair by pair.
//!
//! Chromosomes carry a lineage flag marking descendants of the initial Master
//! sequence. When a crossover occurs both children are descendants iff at
//! least one parent is; without crossover each child keeps its own parent's
//! flag. Mutation never touches the flag.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::landscape::LandscapeSpec;

/// Full deterministic description of a GA run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub ell: usize,
    pub m: usize,
    pub p_c: f64,
    pub p_m: f64,
    pub seed: u64,
}

impl GaConfig {
    pub fn new(ell: usize, m: usize, p_c: f64, p_m: f64, seed: u64) -> Result<Self> {
        let cfg = GaConfig {
            ell,
            m,
            p_c,
            p_m,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell < 2 {
            return Err(Error::config(
                "ell",
                "must be at least 2 (crossover needs a cut site)",
            ));
        }
        validate_population_size(self.m)?;
        self.operators().map(|_| ())
    }

    pub fn operators(&self) -> Result<Operators> {
        Operators::new(self.p_c, self.p_m)
    }
}

pub(crate) fn validate_population_size(m: usize) -> Result<()> {
    if m == 0 || !m.is_multiple_of(2) {
        return Err(Error::config(
            "m",
            format!("must be a positive even integer, got {m}"),
        ));
    }
    Ok(())
}

pub(crate) fn validate_probability(field: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::config(field, format!("must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Crossover and mutation probabilities for one generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operators {
    p_c: f64,
    p_m: f64,
    ln_keep: f64,
}

impl Operators {
    pub fn new(p_c: f64, p_m: f64) -> Result<Self> {
        validate_probability("p_c", p_c)?;
        validate_probability("p_m", p_m)?;
        Ok(Operators {
            p_c,
            p_m,
            ln_keep: (1.0 - p_m).ln(),
        })
    }

    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    pub fn p_m(&self) -> f64 {
        self.p_m
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chromosome {
    pub bits: BitString,
    pub descendant: bool,
}

impl Chromosome {
    pub fn new(bits: BitString, descendant: bool) -> Self {
        Chromosome { bits, descendant }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_master(&self) -> bool {
        self.bits.is_all_ones()
    }
}

/// Cumulative fitness table for roulette-wheel sampling.
#[derive(Debug, Clone)]
pub struct RouletteWheel {
    cumulative: Vec<f64>,
}

impl RouletteWheel {
    pub fn new(fitnesses: &[f64]) -> Result<Self> {
        if fitnesses.is_empty() {
            return Err(Error::InvalidLandscape("empty population".into()));
        }
        let mut cumulative = Vec::with_capacity(fitnesses.len());
        let mut total = 0.0;
        for (i, &f) in fitnesses.iter().enumerate() {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidLandscape(format!(
                    "fitness of chromosome {i} is {f}, must be finite and > 0"
                )));
            }
            total += f;
            cumulative.push(total);
        }
        Ok(RouletteWheel { cumulative })
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("non-empty wheel")
    }

    /// Exact selection probability `f(x(i)) / sum_j f(x(j))`.
    pub fn probability(&self, i: usize) -> f64 {
        let lo = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        (self.cumulative[i] - lo) / self.total()
    }

    /// Draws a 0-based index with probability proportional to its fitness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.total();
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1)
    }
}

/// One roulette-wheel draw; returns a 0-based index.
pub fn select_parent<R: Rng + ?Sized>(fitnesses: &[f64], rng: &mut R) -> Result<usize> {
    Ok(RouletteWheel::new(fitnesses)?.sample(rng))
}

/// Exchanges the suffixes of `a` and `b` after the first `cut` positions.
/// Both children get the OR of the parents' lineage flags.
pub fn crossover_at(a: &Chromosome, b: &Chromosome, cut: usize) -> (Chromosome, Chromosome) {
    let mut x = a.clone();
    let mut y = b.clone();
    x.bits.swap_suffix(&mut y.bits, cut);
    let flag = a.descendant || b.descendant;
    x.descendant = flag;
    y.descendant = flag;
    (x, y)
}

#[derive(Debug, Clone)]
pub struct CrossoverOutcome {
    pub children: (Chromosome, Chromosome),
    /// Cut position in `1..ell`, or `None` when no crossover happened.
    pub cut: Option<usize>,
}

/// Standard single-point crossover: with probability `p_c` a cut site is
/// drawn uniformly among the `ell - 1` internal positions.
pub fn crossover_pair<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    p_c: f64,
    rng: &mut R,
) -> Result<CrossoverOutcome> {
    let ell = a.len();
    if ell < 2 || b.len() != ell {
        return Err(Error::config(
            "ell",
            format!(
                "crossover needs two chromosomes of equal length >= 2, got {ell} and {}",
                b.len()
            ),
        ));
    }
    if rng.random::<f64>() < p_c {
        let cut = rng.random_range(1..ell);
        Ok(CrossoverOutcome {
            children: crossover_at(a, b, cut),
            cut: Some(cut),
        })
    } else {
        Ok(CrossoverOutcome {
            children: (a.clone(), b.clone()),
            cut: None,
        })
    }
}

/// Flips each bit independently with probability `p_m`; returns the number of
/// flips.
///
/// Flip positions are generated by geometric skips, which yields the same law
/// as one Bernoulli trial per bit.
pub fn mutate<R: Rng + ?Sized>(c: &mut Chromosome, ops: &Operators, rng: &mut R) -> usize {
    let ell = c.len();
    if ops.p_m <= 0.0 {
        return 0;
    }
    if ops.p_m >= 1.0 {
        for i in 0..ell {
            c.bits.flip(i);
        }
        return ell;
    }
    let mut flips = 0;
    let mut pos = 0usize;
    loop {
        // failures before the next success, Geometric(p_m) by inversion
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / ops.ln_keep).floor();
        if !skip.is_finite() || skip >= (ell - pos) as f64 {
            break;
        }
        pos += skip as usize;
        c.bits.flip(pos);
        flips += 1;
        pos += 1;
        if pos >= ell {
            break;
        }
    }
    flips
}

/// Probability that mutation maps `from` to `to`: `p^d (1-p)^(ell-d)` with
/// `d` the Hamming distance.
pub fn mutation_probability(from: &BitString, to: &BitString, p_m: f64) -> f64 {
    let d = from.hamming(to) as i32;
    p_m.powi(d) * (1.0 - p_m).powi(from.len() as i32 - d)
}

/// An ordered population with cached fitness values.
#[derive(Debug, Clone)]
pub struct Population {
    members: Vec<Chromosome>,
    fitness: Vec<f64>,
    generation: usize,
}

impl Population {
    pub fn new(members: Vec<Chromosome>, landscape: &LandscapeSpec) -> Result<Self> {
        validate_population_size(members.len())?;
        let ell = landscape.ell();
        if let Some(bad) = members.iter().find(|c| c.len() != ell) {
            return Err(Error::config(
                "ell",
                format!(
                    "chromosome of length {} in a landscape of length {ell}",
                    bad.len()
                ),
            ));
        }
        let fitness: Vec<f64> = members.iter().map(|c| landscape.fitness(&c.bits)).collect();
        if let Some(f) = fitness.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::InvalidLandscape(format!("non-positive fitness {f}")));
        }
        Ok(Population {
            members,
            fitness,
            generation: 0,
        })
    }

    /// One Master sequence (flagged as the lineage root) and `m - 1` all-zero
    /// chromosomes.
    pub fn sharp_peak_initial(m: usize, landscape: &LandscapeSpec) -> Result<Self> {
        let ell = landscape.ell();
        let mut members = Vec::with_capacity(m);
        members.push(Chromosome::new(BitString::ones(ell), true));
        members.extend((1..m).map(|_| Chromosome::new(BitString::zeros(ell), false)));
        Population::new(members, landscape)
    }

    pub fn members(&self) -> &[Chromosome] {
        &self.members
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Statistics from the cached fitness values.
    pub fn stats(&self, reference_level: f64) -> PopulationStats {
        PopulationStats::from_parts(&self.members, &self.fitness, reference_level)
    }

    /// Maximum number of ones among chromosomes outside the progeny of the
    /// initial Master sequence (0 when there are none).
    pub fn max_ones_non_descendant(&self) -> usize {
        self.members
            .iter()
            .filter(|c| !c.descendant)
            .map(|c| c.bits.count_ones())
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationStats {
    pub f_star: f64,
    pub f_bar: f64,
    pub n_master: usize,
    pub n_descendants: usize,
    pub n_at_least: usize,
}

impl PopulationStats {
    fn from_parts(members: &[Chromosome], fitness: &[f64], reference_level: f64) -> Self {
        let f_star = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let f_bar = fitness.iter().sum::<f64>() / fitness.len() as f64;
        PopulationStats {
            f_star,
            f_bar,
            n_master: members.iter().filter(|c| c.is_master()).count(),
            n_descendants: members.iter().filter(|c| c.descendant).count(),
            n_at_least: fitness.iter().filter(|&&f| f >= reference_level).count(),
        }
    }
}

/// Recomputes every statistic from the genotypes, ignoring cached fitness.
pub fn population_stats(
    pop: &Population,
    landscape: &LandscapeSpec,
    reference_level: f64,
) -> PopulationStats {
    let fitness: Vec<f64> = pop
        .members
        .iter()
        .map(|c| landscape.fitness(&c.bits))
        .collect();
    PopulationStats::from_parts(&pop.members, &fitness, reference_level)
}

/// Instrumentation of one generation step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerationTrace {
    /// Number of selected parents (out of `m`) carrying the lineage flag.
    pub selected_descendants: usize,
    /// Largest number of bit flips undergone by a single child.
    pub max_mutations: usize,
    pub crossovers: usize,
}

/// Builds generation `n + 1` from generation `n`.
pub fn next_generation<R: Rng + ?Sized>(
    pop: &Population,
    landscape: &LandscapeSpec,
    ops: &Operators,
    rng: &mut R,
) -> Result<Population> {
    next_generation_traced(pop, landscape, ops, rng).map(|(p, _)| p)
}

/// [`next_generation`] plus the step's [`GenerationTrace`].
///
/// Performs `m / 2` independent rounds of: two roulette-wheel selections,
/// crossover, mutation of each child, append both.
pub fn next_generation_traced<R: Rng + ?Sized>(
    pop: &Population,
    landscape: &LandscapeSpec,
    ops: &Operators,
    rng: &mut R,
) -> Result<(Population, GenerationTrace)> {
    let m = pop.len();
    validate_population_size(m)?;
    let wheel = RouletteWheel::new(&pop.fitness)?;
    let mut members = Vec::with_capacity(m);
    let mut fitness = Vec::with_capacity(m);
    let mut trace = GenerationTrace::default();
    for _ in 0..m / 2 {
        let i = wheel.sample(rng);
        let j = wheel.sample(rng);
        let (a, b) = (&pop.members[i], &pop.members[j]);
        trace.selected_descendants += a.descendant as usize + b.descendant as usize;
        let outcome = crossover_pair(a, b, ops.p_c, rng)?;
        let crossed = outcome.cut.is_some();
        trace.crossovers += crossed as usize;
        let (mut x, mut y) = outcome.children;
        for (child, parent) in [(&mut x, i), (&mut y, j)] {
            let flips = mutate(child, ops, rng);
            trace.max_mutations = trace.max_mutations.max(flips);
            let f = if !crossed && flips == 0 {
                pop.fitness[parent]
            } else {
                landscape.fitness(&child.bits)
            };
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidLandscape(format!(
                    "non-positive fitness {f} for {}",
                    child.bits
                )));
            }
            fitness.push(f);
        }
        members.push(x);
        members.push(y);
    }
    Ok((
        Population {
            members,
            fitness,
            generation: pop.generation + 1,
        },
        trace,
    ))
}
