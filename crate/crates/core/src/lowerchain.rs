//! The monotone Markov chain `(N_n)` that bounds from below the number of
//! chromosomes at least as fit as the initial best one.
//!
//! From state `i`, each of the `m/2` pairs escapes crossover with probability
//! `1 - p_C` and then contributes two independent Bernoulli(`eps_m(i)`)
//! copies. State 0 is absorbing; the revived variant moves from 0 to 1
//! with probability 1 and is irreducible.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probability::DiscreteLaw;
use crate::rng::{replicate, SimRng};
use crate::stats::Proportion;

/// Largest population size for which the exact matrix is built.
pub const MAX_MATRIX_M: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerChainParams {
    pub m: usize,
    pub pi: f64,
    /// `f0* / f_bar0`.
    pub ratio: f64,
    pub p_c: f64,
    pub p_m: f64,
    pub ell: usize,
}

impl LowerChainParams {
    /// Derives `pi` from the other parameters.
    pub fn new(m: usize, ratio: f64, p_c: f64, p_m: f64, ell: usize) -> Result<Self> {
        let pi = ratio * (1.0 - p_c) * (1.0 - p_m).powi(ell as i32);
        let params = LowerChainParams {
            m,
            pi,
            ratio,
            p_c,
            p_m,
            ell,
        };
        params.validate()?;
        Ok(params)
    }

    /// Solves for `p_M` so that the chain has parameter `pi`.
    pub fn from_pi(m: usize, pi: f64, ratio: f64, p_c: f64, ell: usize) -> Result<Self> {
        let keep = pi / (ratio * (1.0 - p_c));
        if !(keep > 0.0 && keep <= 1.0) || ell == 0 {
            return Err(Error::config(
                "pi",
                format!("pi = {pi} is unreachable with ratio {ratio} and p_C = {p_c}"),
            ));
        }
        let p_m = 1.0 - keep.powf(1.0 / ell as f64);
        let params = LowerChainParams {
            m,
            pi,
            ratio,
            p_c,
            p_m,
            ell,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || !self.m.is_multiple_of(2) {
            return Err(Error::config(
                "m",
                format!("m = {} must be even and positive", self.m),
            ));
        }
        if !(self.pi > 0.0) {
            return Err(Error::config("pi", format!("pi = {} must be > 0", self.pi)));
        }
        if !(self.ratio > 1.0) {
            return Err(Error::config(
                "ratio",
                format!("ratio = {} must be > 1", self.ratio),
            ));
        }
        for (name, p) in [("p_c", self.p_c), ("p_m", self.p_m)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(name, format!("{p} outside [0, 1]")));
            }
        }
        if self.ell == 0 {
            return Err(Error::config("ell", "ell must be positive"));
        }
        let implied = self.ratio * (1.0 - self.p_c) * (1.0 - self.p_m).powi(self.ell as i32);
        if (implied - self.pi).abs() > 1e-12 * self.pi.max(1.0) {
            return Err(Error::config(
                "pi",
                format!("pi = {} but ratio (1-p_C)(1-p_M)^ell = {implied}", self.pi),
            ));
        }
        Ok(())
    }

    /// `i f0* (1-p_M)^ell / (m sqrt(pi) f_bar0)` before clamping to 1.
    pub fn epsilon_unclamped(&self, i: usize) -> f64 {
        i as f64 * self.ratio * (1.0 - self.p_m).powi(self.ell as i32)
            / (self.m as f64 * self.pi.sqrt())
    }

    pub fn epsilon(&self, i: usize) -> f64 {
        self.epsilon_unclamped(i).min(1.0)
    }

    /// `m / sqrt(pi)`, the level defining `tau*`.
    pub fn target(&self) -> f64 {
        self.m as f64 / self.pi.sqrt()
    }
}

/// One transition from state `i`.
pub fn transition_sample<R: Rng + ?Sized>(
    params: &LowerChainParams,
    i: usize,
    revive: bool,
    rng: &mut R,
) -> usize {
    if i == 0 {
        return revive as usize;
    }
    let pairs = (params.m / 2) as u64;
    let kept = Binomial::new(pairs, 1.0 - params.p_c)
        .expect("valid")
        .sample(rng);
    let copies = Binomial::new(2 * kept, params.epsilon(i))
        .expect("valid")
        .sample(rng);
    (copies as usize).min(params.m)
}

/// Exact `(m+1) x (m+1)` transition matrix.
pub fn transition_matrix(params: &LowerChainParams, revive: bool) -> Result<Vec<Vec<f64>>> {
    let m = params.m;
    if m > MAX_MATRIX_M {
        return Err(Error::Capability(format!(
            "exact transition matrix supports m <= {MAX_MATRIX_M}, got {m}"
        )));
    }
    let pairs = DiscreteLaw::binomial((m / 2) as u64, 1.0 - params.p_c)?;
    let mut matrix = vec![vec![0.0; m + 1]; m + 1];
    matrix[0][revive as usize] = 1.0;
    for (i, row) in matrix.iter_mut().enumerate().skip(1) {
        let eps = params.epsilon(i);
        for b in 0..=m / 2 {
            let weight = pairs.prob(b);
            if weight == 0.0 {
                continue;
            }
            let copies = DiscreteLaw::binomial(2 * b as u64, eps)?;
            for (j, p) in copies.pmf().iter().enumerate() {
                row[j] += weight * p;
            }
        }
    }
    Ok(matrix)
}

/// Row-major dense text, one row per line, entries separated by spaces.
pub fn matrix_to_text(matrix: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in matrix {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Runs one chain per initial state, all driven by the same `Z_k` and
/// `U_{2k-1}, U_{2k}` at every step. Output is aligned with `initial`.
pub fn coupled_trajectories<R: Rng + ?Sized>(
    params: &LowerChainParams,
    initial: &[usize],
    horizon: usize,
    revive: bool,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let pairs = params.m / 2;
    let mut paths: Vec<Vec<usize>> = initial
        .iter()
        .map(|&i| {
            let mut p = Vec::with_capacity(horizon + 1);
            p.push(i);
            p
        })
        .collect();
    let mut kept = vec![false; pairs];
    let mut u = vec![0.0f64; 2 * pairs];
    for _ in 0..horizon {
        for k in 0..pairs {
            kept[k] = rng.random::<f64>() < 1.0 - params.p_c;
            u[2 * k] = rng.random();
            u[2 * k + 1] = rng.random();
        }
        for path in &mut paths {
            let n = *path.last().expect("non-empty");
            let next = if n == 0 {
                revive as usize
            } else {
                let eps = params.epsilon(n);
                (0..pairs)
                    .filter(|&k| kept[k])
                    .map(|k| (u[2 * k] < eps) as usize + (u[2 * k + 1] < eps) as usize)
                    .sum()
            };
            path.push(next);
        }
    }
    paths
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauStar {
    /// Frequency of `tau* <= horizon`.
    pub success: Proportion,
    /// `histogram[n]` = number of replicas with `tau* = n`.
    pub histogram: Vec<u64>,
}

/// Distribution of `tau*`, the first `n >= 0` with `N_n >= m / sqrt(pi)`,
/// for the chain started at 1.
pub fn hitting_time_tau_star(
    params: &LowerChainParams,
    horizon: usize,
    replicas: usize,
    seed: u64,
) -> Result<TauStar> {
    if params.pi <= 1.0 {
        return Err(Error::Precondition(format!(
            "tau* needs pi > 1, got {}",
            params.pi
        )));
    }
    let target = params.target();
    let times = replicate(seed, replicas, |_, rng: &mut SimRng| {
        let mut n = 1usize;
        for t in 0..=horizon {
            if n as f64 >= target {
                return Some(t);
            }
            if n == 0 || t == horizon {
                break;
            }
            n = transition_sample(params, n, false, rng);
        }
        None
    });
    let mut histogram = vec![0u64; horizon + 1];
    for t in times.iter().flatten() {
        histogram[*t] += 1;
    }
    let hits = times.iter().filter(|t| t.is_some()).count();
    Ok(TauStar {
        success: Proportion::wilson(hits, replicas, 0.95),
        histogram,
    })
}

/// Frequency of the one-step failure `N_1 <= rho i` given `N_0 = i`.
pub fn geometric_growth_check(
    params: &LowerChainParams,
    i: usize,
    rho: f64,
    replicas: usize,
    seed: u64,
) -> Result<Proportion> {
    if params.pi <= 1.0 {
        return Err(Error::Precondition(format!(
            "growth check needs pi > 1, got {}",
            params.pi
        )));
    }
    if !(rho > 1.0 && rho < params.pi.sqrt()) {
        return Err(Error::Precondition(format!(
            "rho = {rho} must lie in (1, sqrt(pi) = {})",
            params.pi.sqrt()
        )));
    }
    if i as f64 > params.target() {
        return Err(Error::Precondition(format!(
            "state {i} exceeds m / sqrt(pi) = {}",
            params.target()
        )));
    }
    let failures = replicate(seed, replicas, |_, rng| {
        transition_sample(params, i, false, rng) as f64 <= rho * i as f64
    });
    Ok(Proportion::wilson(
        failures.iter().filter(|&&f| f).count(),
        replicas,
        0.95,
    ))
}

/// For the revived chain started at 1, the value right after the first
/// visit to each of `states`. Replicas that do not visit every state within
/// `max_steps` are dropped; the count of dropped replicas is returned too.
pub fn first_visit_successors(
    params: &LowerChainParams,
    states: &[usize],
    max_steps: usize,
    replicas: usize,
    seed: u64,
) -> (Vec<Vec<usize>>, usize) {
    let runs = replicate(seed, replicas, |_, rng: &mut SimRng| {
        let mut out: Vec<Option<usize>> = vec![None; states.len()];
        let mut missing = states.len();
        let mut n = 1usize;
        for _ in 0..max_steps {
            let next = transition_sample(params, n, true, rng);
            for (slot, &s) in out.iter_mut().zip(states) {
                if s == n && slot.is_none() {
                    *slot = Some(next);
                    missing -= 1;
                }
            }
            if missing == 0 {
                return Some(out.into_iter().map(|v| v.expect("visited")).collect());
            }
            n = next;
        }
        None
    });
    let dropped = runs.iter().filter(|r| r.is_none()).count();
    (runs.into_iter().flatten().collect(), dropped)
}
