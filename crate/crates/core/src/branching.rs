//! Galton–Watson processes started from a single individual.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{replicate, SimRng};
use crate::stats::{linear_fit, LinearFit, Proportion};

/// Population size at which a trajectory is stopped and flagged.
pub const DEFAULT_CAP: u64 = 1_000_000_000;

/// Offspring law of a Galton–Watson process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReproductionLaw {
    /// `scale * Poisson(lambda)`.
    ScaledPoisson { scale: u32, lambda: f64 },
    /// `Poisson(single) + 2 Poisson(double)`, independent.
    PoissonMixture { single: f64, double: f64 },
    /// Explicit pmf on `{0, 1, ...}`.
    Explicit { pmf: Vec<f64> },
}

impl ReproductionLaw {
    pub fn scaled_poisson(scale: u32, lambda: f64) -> Result<Self> {
        check_rate("lambda", lambda)?;
        Ok(ReproductionLaw::ScaledPoisson { scale, lambda })
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::scaled_poisson(1, lambda)
    }

    pub fn poisson_mixture(single: f64, double: f64) -> Result<Self> {
        check_rate("single", single)?;
        check_rate("double", double)?;
        Ok(ReproductionLaw::PoissonMixture { single, double })
    }

    /// Dominating law for the number of Master descendants when `pi < 1`:
    /// `Poisson(pi (1 + 3 eps)) + 2 Poisson(eps)`.
    pub fn nu_star(pi: f64, eps: f64) -> Result<Self> {
        Self::poisson_mixture(pi * (1.0 + 3.0 * eps), eps)
    }

    pub fn explicit(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() || pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Domain("pmf entries must be finite and >= 0".into()));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("pmf sums to {total}, not 1")));
        }
        Ok(ReproductionLaw::Explicit { pmf })
    }

    pub fn point_mass(k: usize) -> Self {
        let mut pmf = vec![0.0; k + 1];
        pmf[k] = 1.0;
        ReproductionLaw::Explicit { pmf }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ReproductionLaw::ScaledPoisson { scale, lambda } => *scale as f64 * lambda,
            ReproductionLaw::PoissonMixture { single, double } => single + 2.0 * double,
            ReproductionLaw::Explicit { pmf } => {
                pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
            }
        }
    }

    /// Probability generating function `E s^X` on `[0, 1]`.
    pub fn pgf(&self, s: f64) -> f64 {
        match self {
            ReproductionLaw::ScaledPoisson { scale, lambda } => {
                (lambda * (s.powi(*scale as i32) - 1.0)).exp()
            }
            ReproductionLaw::PoissonMixture { single, double } => {
                (single * (s - 1.0) + double * (s * s - 1.0)).exp()
            }
            ReproductionLaw::Explicit { pmf } => pmf.iter().rev().fold(0.0, |acc, p| acc * s + p),
        }
    }

    fn is_point_mass_at_one(&self) -> bool {
        match self {
            ReproductionLaw::ScaledPoisson { .. } | ReproductionLaw::PoissonMixture { .. } => false,
            ReproductionLaw::Explicit { pmf } => pmf.get(1).copied() == Some(1.0),
        }
    }

    /// Total offspring of `z` independent individuals.
    pub fn sample_sum<R: Rng + ?Sized>(&self, z: u64, rng: &mut R) -> u64 {
        if z == 0 {
            return 0;
        }
        match self {
            ReproductionLaw::ScaledPoisson { scale, lambda } => {
                *scale as u64 * sample_poisson(z as f64 * lambda, rng)
            }
            ReproductionLaw::PoissonMixture { single, double } => {
                sample_poisson(z as f64 * single, rng) + 2 * sample_poisson(z as f64 * double, rng)
            }
            ReproductionLaw::Explicit { pmf } => {
                // multinomial counts by sequential conditional binomials
                let mut remaining = z;
                let mut mass_left = 1.0;
                let mut total = 0u64;
                for (k, &p) in pmf.iter().enumerate() {
                    if remaining == 0 {
                        break;
                    }
                    let count = if k + 1 == pmf.len() || p >= mass_left {
                        remaining
                    } else if p <= 0.0 {
                        0
                    } else {
                        Binomial::new(remaining, (p / mass_left).min(1.0))
                            .expect("valid binomial")
                            .sample(rng)
                    };
                    total += k as u64 * count;
                    remaining -= count;
                    mass_left -= p;
                }
                total
            }
        }
    }
}

fn check_rate(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} = {value} must be finite and >= 0"
        )))
    }
}

pub(crate) fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GwTrajectory {
    /// `Z_0, Z_1, ...`; shorter than `horizon + 1` only after an overflow.
    pub sizes: Vec<u64>,
    pub extinct_at: Option<usize>,
    /// Generation at which the population first exceeded the cap.
    pub overflow_at: Option<usize>,
}

impl GwTrajectory {
    /// `Z_n`, or `None` when the trajectory stopped at an overflow before `n`
    /// (the true value is then at least the cap).
    pub fn size_at(&self, n: usize) -> Option<u64> {
        self.sizes.get(n).copied()
    }

    pub fn survives_to(&self, n: usize) -> bool {
        self.extinct_at.is_none_or(|e| e > n)
    }
}

pub fn gw_simulate<R: Rng + ?Sized>(
    law: &ReproductionLaw,
    horizon: usize,
    rng: &mut R,
) -> GwTrajectory {
    gw_simulate_capped(law, horizon, DEFAULT_CAP, rng)
}

pub fn gw_simulate_capped<R: Rng + ?Sized>(
    law: &ReproductionLaw,
    horizon: usize,
    cap: u64,
    rng: &mut R,
) -> GwTrajectory {
    let mut sizes = Vec::with_capacity(horizon + 1);
    sizes.push(1u64);
    let mut extinct_at = None;
    let mut overflow_at = None;
    let mut z = 1u64;
    for n in 1..=horizon {
        if z > 0 {
            z = law.sample_sum(z, rng);
            if z == 0 {
                extinct_at = Some(n);
            }
        }
        sizes.push(z);
        if z > cap {
            overflow_at = Some(n);
            break;
        }
    }
    GwTrajectory {
        sizes,
        extinct_at,
        overflow_at,
    }
}

/// Smallest fixed point of the pgf, by iteration from 0.
///
/// Laws with mean at most 1 (other than the point mass at 1) die out almost
/// surely and return 1 without iterating.
pub fn gw_extinction_pgf(law: &ReproductionLaw, tol: f64) -> Result<f64> {
    if law.is_point_mass_at_one() {
        return Ok(0.0);
    }
    if law.mean() <= 1.0 {
        return Ok(1.0);
    }
    const MAX_ITER: usize = 1_000_000;
    let mut q = 0.0;
    for _ in 0..MAX_ITER {
        let next = law.pgf(q);
        if (next - q).abs() < tol {
            return Ok(next);
        }
        q = next;
    }
    Err(Error::Numerical(format!(
        "pgf iteration did not reach tolerance {tol} in {MAX_ITER} steps (last value {q})"
    )))
}

/// Fraction of `replicas` trajectories extinct by `horizon`.
pub fn extinction_frequency(
    law: &ReproductionLaw,
    horizon: usize,
    replicas: usize,
    seed: u64,
) -> Proportion {
    let extinct = replicate(seed, replicas, |_, rng| {
        gw_simulate(law, horizon, rng).extinct_at.is_some()
    });
    Proportion::wilson(extinct.iter().filter(|&&e| e).count(), replicas, 0.95)
}

/// Empirical `P(Z_n > 0)` for `n = 0..=horizon`.
pub fn gw_survival_decay(
    law: &ReproductionLaw,
    horizon: usize,
    replicas: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mean = law.mean();
    if mean >= 1.0 {
        return Err(Error::Precondition(format!(
            "survival decay needs mean < 1, got {mean}"
        )));
    }
    let ends = replicate(seed, replicas, |_, rng: &mut SimRng| {
        gw_simulate(law, horizon, rng).extinct_at
    });
    let mut alive = vec![0usize; horizon + 1];
    for end in ends {
        let last = end.map_or(horizon, |e| e - 1);
        for a in &mut alive[..=last] {
            *a += 1;
        }
    }
    Ok(alive.iter().map(|&a| a as f64 / replicas as f64).collect())
}

/// Least-squares line through `(n, ln P(Z_n > 0))` for `n >= burn_in` with a
/// nonzero frequency.
pub fn survival_log_fit(frequencies: &[f64], burn_in: usize) -> Option<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = frequencies
        .iter()
        .enumerate()
        .skip(burn_in)
        .filter(|(_, &f)| f > 0.0)
        .map(|(n, &f)| (n as f64, f.ln()))
        .unzip();
    linear_fit(&x, &y)
}

/// Frequency of `tau_1 < kappa ln n`, where `tau_1` is the first generation
/// `k >= 1` with `Z_k > n^exponent`.
pub fn gw_threshold_hitting(
    law: &ReproductionLaw,
    exponent: f64,
    n: u64,
    kappa: f64,
    replicas: usize,
    seed: u64,
) -> Result<Proportion> {
    let mean = law.mean();
    if mean <= 1.0 {
        return Err(Error::Precondition(format!(
            "threshold hitting needs mean > 1, got {mean}"
        )));
    }
    if n < 2 || !(kappa >= 0.0) || !(exponent >= 0.0) {
        return Err(Error::Precondition(format!(
            "need n >= 2, kappa >= 0, exponent >= 0 (got {n}, {kappa}, {exponent})"
        )));
    }
    let limit = kappa * (n as f64).ln();
    let threshold = (n as f64).powf(exponent);
    let hits = replicate(seed, replicas, |_, rng| {
        let mut z = 1u64;
        let mut k = 1usize;
        while (k as f64) < limit {
            z = law.sample_sum(z, rng);
            if z as f64 > threshold {
                return true;
            }
            if z == 0 {
                return false;
            }
            k += 1;
        }
        false
    });
    Ok(Proportion::wilson(
        hits.iter().filter(|&&h| h).count(),
        replicas,
        0.95,
    ))
}
