use serde::{Deserialize, Serialize};

use super::{simulate_series, GenerationRecord, Levels, RegimeSetup, StoppingTimes};
use crate::branching::{gw_simulate, ReproductionLaw};
use crate::error::{Error, Result};
use crate::ga::{next_generation, Operators, Population};
use crate::landscape::LandscapeSpec;
use crate::lowerchain::{transition_matrix, LowerChainParams};
use crate::rng::{mix64, replicate};
use crate::stats::{dkw_epsilon, Proportion};

/// Confidence of each DKW band.
pub const DKW_CONFIDENCE: f64 = 0.99;

/// Salt separating Galton–Watson replicas from GA replicas.
const GW_STREAM: u64 = 0x6077_57A7_0000_0001;

/// One threshold of a tail comparison: `P(dominated >= k)` against
/// `P(dominating >= k)` at generation `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub n: usize,
    pub k: u64,
    pub dominated: f64,
    pub dominating: f64,
    pub tol_dominated: f64,
    pub tol_dominating: f64,
    /// `dominated - tol_dominated <= dominating + tol_dominating`: no
    /// violation survives both confidence bands.
    pub pass: bool,
}

impl TailRow {
    fn new(
        n: usize,
        k: u64,
        dominated: f64,
        dominating: f64,
        tol_dominated: f64,
        tol_dominating: f64,
    ) -> Self {
        TailRow {
            n,
            k,
            dominated,
            dominating,
            tol_dominated,
            tol_dominating,
            pass: dominated - tol_dominated <= dominating + tol_dominating,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailComparison {
    pub rows: Vec<TailRow>,
}

impl TailComparison {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

/// Fraction of `sorted` at or above `k`.
fn tail(sorted: &[u64], k: u64) -> f64 {
    let below = sorted.partition_point(|&x| x < k);
    (sorted.len() - below) as f64 / sorted.len() as f64
}

/// Compares empirical tails at every `k` in `0..=k_max` for each generation.
fn compare_samples(dominated: &[Vec<u64>], dominating: &[Vec<u64>], k_max: u64) -> TailComparison {
    let mut rows = Vec::new();
    for (n, (a, b)) in dominated.iter().zip(dominating).enumerate() {
        let mut a = a.clone();
        let mut b = b.clone();
        a.sort_unstable();
        b.sort_unstable();
        let (ta, tb) = (
            dkw_epsilon(a.len(), DKW_CONFIDENCE),
            dkw_epsilon(b.len(), DKW_CONFIDENCE),
        );
        for k in 0..=k_max {
            rows.push(TailRow::new(n, k, tail(&a, k), tail(&b, k), ta, tb));
        }
    }
    TailComparison { rows }
}

/// Transposes per-replica series into per-generation samples.
fn by_generation(per_replica: &[Vec<u64>], horizon: usize) -> Vec<Vec<u64>> {
    (0..=horizon)
        .map(|n| per_replica.iter().map(|s| s[n]).collect())
        .collect()
}

/// Galton–Watson sizes per generation; overflowed values count as `u64::MAX`.
fn gw_samples(law: &ReproductionLaw, horizon: usize, replicas: usize, seed: u64) -> Vec<Vec<u64>> {
    let runs = replicate(mix64(seed, GW_STREAM), replicas, |_, rng| {
        let t = gw_simulate(law, horizon, rng);
        (0..=horizon)
            .map(|n| t.size_at(n).unwrap_or(u64::MAX))
            .collect::<Vec<u64>>()
    });
    by_generation(&runs, horizon)
}

/// Sharp peak, `ell = m`, ratio 2: the setting of the disordered regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpPeakConfig {
    pub m: usize,
    pub pi: f64,
    pub p_c: f64,
}

impl SharpPeakConfig {
    fn setup(&self, replicas: usize, seed: u64) -> Result<RegimeSetup> {
        RegimeSetup::sharp_peak_ratio_two(self.pi, self.m, self.p_c, 0.0, replicas, seed)
    }

    fn series(
        &self,
        horizon: usize,
        replicas: usize,
        seed: u64,
    ) -> Result<(RegimeSetup, Vec<Vec<GenerationRecord>>)> {
        let setup = self.setup(replicas, seed)?;
        let ops = Operators::new(setup.p_c, setup.p_m)?;
        let runs = replicate(seed, replicas, |_, rng| {
            simulate_series(&setup.landscape, &setup.initial, &ops, horizon, rng)
        });
        let series = runs.into_iter().collect::<Result<Vec<_>>>()?;
        Ok((setup, series))
    }
}

/// Tails of `T_n 1{tau1 >= n}` against a Galton–Watson process with law
/// `2 Poisson(4)`, for `n = 0..=horizon` and `k = 0..=m+1`.
pub fn verify_tn_domination(
    cfg: &SharpPeakConfig,
    horizon: usize,
    replicas: usize,
    seed: u64,
) -> Result<TailComparison> {
    let (setup, series) = cfg.series(horizon, replicas, seed)?;
    let levels = setup.levels();
    let stopped: Vec<Vec<u64>> = series
        .iter()
        .map(|s| {
            let tau1 = StoppingTimes::scan(s, &levels).tau1;
            s.iter()
                .map(|r| {
                    if tau1.is_none_or(|t| t >= r.gen) {
                        r.n_descendants as u64
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    let law = ReproductionLaw::scaled_poisson(2, 4.0)?;
    let gw = gw_samples(&law, horizon, replicas, seed);
    Ok(compare_samples(
        &by_generation(&stopped, horizon),
        &gw,
        cfg.m as u64 + 1,
    ))
}

/// Tails of `N*_n 1{tau >= n}`, `tau = min(tau0, tau1, tau2)`, against a
/// Galton–Watson process with law `Poisson(pi (1 + 3 eps)) + 2 Poisson(eps)`.
pub fn verify_nstar_domination(
    cfg: &SharpPeakConfig,
    eps: f64,
    horizon: usize,
    replicas: usize,
    m_floor: usize,
    seed: u64,
) -> Result<TailComparison> {
    if cfg.m < m_floor {
        return Err(Error::Precondition(format!(
            "m = {} is below the configured floor {m_floor}",
            cfg.m
        )));
    }
    let law = ReproductionLaw::nu_star(cfg.pi, eps)?;
    if !(eps > 0.0) || law.mean() >= 1.0 {
        return Err(Error::Precondition(format!(
            "need eps > 0 and a subcritical dominating law; eps = {eps} gives mean {}",
            law.mean()
        )));
    }
    let (setup, series) = cfg.series(horizon, replicas, seed)?;
    let levels = setup.levels();
    let stopped: Vec<Vec<u64>> = series
        .iter()
        .map(|s| {
            let t = StoppingTimes::scan(s, &levels);
            let tau = [t.tau0, t.tau1, t.tau2].into_iter().flatten().min();
            s.iter()
                .map(|r| {
                    if tau.is_none_or(|t| t >= r.gen) {
                        r.n_master as u64
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    let gw = gw_samples(&law, horizon, replicas, seed);
    Ok(compare_samples(
        &by_generation(&stopped, horizon),
        &gw,
        cfg.m as u64 + 1,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tau2Report {
    pub ell: usize,
    pub replicas: usize,
    /// `histogram[n]` = replicas with `tau2 = n`; runs where `tau2` exceeds
    /// the horizon are not counted.
    pub histogram: Vec<u64>,
    /// Frequency of `tau2 > ln(ell) / 5` (unhit counts as beyond).
    pub late: Proportion,
    /// Largest `D_n` over replicas, per generation.
    pub max_d: Vec<usize>,
    /// Steps with `D_{n+1} > 2 D_n + (max flips at step n+1)`.
    pub recursion_violations: usize,
    pub steps_checked: usize,
}

/// Distribution of `tau2` and a per-step check of the recursion on `D_n`.
pub fn measure_tau2_and_d(
    cfg: &SharpPeakConfig,
    horizon: usize,
    replicas: usize,
    seed: u64,
) -> Result<Tau2Report> {
    let (setup, series) = cfg.series(horizon, replicas, seed)?;
    let levels = setup.levels();
    let ell = setup.ell();
    let mut histogram = vec![0u64; horizon + 1];
    let mut max_d = vec![0usize; horizon + 1];
    let mut violations = 0;
    let mut steps = 0;
    let mut late = 0;
    let cutoff = (ell as f64).ln() / 5.0;
    for s in &series {
        let tau2 = StoppingTimes::scan(s, &levels).tau2;
        if let Some(t) = tau2 {
            histogram[t] += 1;
        }
        if tau2.is_none_or(|t| t as f64 > cutoff) {
            late += 1;
        }
        for (n, r) in s.iter().enumerate() {
            max_d[n] = max_d[n].max(r.d_max);
        }
        for w in s.windows(2) {
            steps += 1;
            if w[1].d_max > 2 * w[0].d_max + w[1].max_mutations {
                violations += 1;
            }
        }
    }
    Ok(Tau2Report {
        ell,
        replicas,
        histogram,
        late: Proportion::wilson(late, replicas, 0.95),
        max_d,
        recursion_violations: violations,
        steps_checked: steps,
    })
}

/// Conditioned one-step sampling of the GA against the lower chain.
#[derive(Debug, Clone)]
pub struct OneStepConfig {
    pub landscape: LandscapeSpec,
    pub initial: Population,
    pub pi: f64,
    pub p_c: f64,
    /// Target number of conditioned transitions per state.
    pub samples: usize,
    /// Generations per trajectory at most.
    pub max_generations: usize,
    /// Trajectories per batch; batches run until every reachable state has
    /// `samples` transitions or `max_batches` is reached.
    pub batch: usize,
    pub max_batches: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneStepRow {
    pub i: usize,
    pub j: usize,
    /// Empirical `P(N(X_{n+1}) >= j | N(X_n) = i, tau_bar > n)`.
    pub ga_tail: f64,
    /// Exact `P(N_{n+1} >= j | N_n = i)`.
    pub chain_tail: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneStepReport {
    pub params: LowerChainParams,
    pub rows: Vec<OneStepRow>,
    /// Conditioned transitions collected per state `0..=m`.
    pub samples: Vec<usize>,
    pub trajectories: usize,
}

impl OneStepReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    /// States never observed under the conditioning.
    pub fn unreachable(&self) -> Vec<usize> {
        (0..self.samples.len())
            .filter(|&i| self.samples[i] == 0)
            .collect()
    }
}

/// Collects GA transitions from generations `n` with `tau_bar > n`, grouped
/// by `N(X_n, f0*)`, and compares their tails with the exact rows of the
/// lower chain built on the same parameters.
pub fn verify_one_step_dominance(cfg: &OneStepConfig) -> Result<OneStepReport> {
    let m = cfg.initial.len();
    let s0 = cfg.initial.stats(0.0);
    let ratio = s0.f_star / s0.f_bar;
    if !(cfg.pi > 1.0) {
        return Err(Error::Precondition(format!(
            "one-step check needs pi > 1, got {}",
            cfg.pi
        )));
    }
    let params = LowerChainParams::from_pi(m, cfg.pi, ratio, cfg.p_c, cfg.landscape.ell())?;
    let matrix = transition_matrix(&params, false)?;
    let ops = Operators::new(params.p_c, params.p_m)?;
    let levels = Levels::new(m, cfg.landscape.ell(), cfg.pi, s0.f_bar);
    let mut counts = vec![vec![0u64; m + 1]; m + 1];
    let mut trajectories = 0;
    for b in 0..cfg.max_batches {
        let runs = replicate(mix64(cfg.seed, b as u64), cfg.batch, |_, rng| {
            let mut local = Vec::new();
            let mut pop = cfg.initial.clone();
            let mut i = pop.stats(s0.f_star).n_at_least;
            for _ in 0..cfg.max_generations {
                let next = next_generation(&pop, &cfg.landscape, &ops, rng)?;
                let s = next.stats(s0.f_star);
                local.push((i, s.n_at_least));
                if s.f_bar >= levels.mean_fitness {
                    break;
                }
                i = s.n_at_least;
                pop = next;
            }
            Ok(local)
        });
        for run in runs {
            for (i, j) in run? {
                counts[i][j] += 1;
            }
        }
        trajectories += cfg.batch;
        let totals: Vec<u64> = counts.iter().map(|c| c.iter().sum()).collect();
        if totals.iter().all(|&t| t == 0 || t >= cfg.samples as u64) {
            break;
        }
    }
    let mut rows = Vec::new();
    let mut samples = Vec::with_capacity(m + 1);
    for (i, row) in counts.iter().enumerate() {
        let total: u64 = row.iter().sum();
        samples.push(total as usize);
        if total == 0 {
            continue;
        }
        let tol = dkw_epsilon(total as usize, DKW_CONFIDENCE);
        let mut ga_above = total;
        let mut chain_above = 1.0f64;
        for j in 0..=m {
            let ga_tail = ga_above as f64 / total as f64;
            let chain_tail = chain_above.clamp(0.0, 1.0);
            rows.push(OneStepRow {
                i,
                j,
                ga_tail,
                chain_tail,
                tolerance: tol,
                samples: total as usize,
                pass: ga_tail + tol >= chain_tail,
            });
            ga_above -= row[j];
            chain_above -= matrix[i][j];
        }
    }
    Ok(OneStepReport {
        params,
        rows,
        samples,
        trajectories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::ga::Chromosome;

    #[test]
    fn tail_counts() {
        let s = [0, 1, 1, 3];
        assert_eq!(tail(&s, 0), 1.0);
        assert_eq!(tail(&s, 1), 0.75);
        assert_eq!(tail(&s, 2), 0.25);
        assert_eq!(tail(&s, 4), 0.0);
    }

    #[test]
    fn tn_table_has_trivial_rows() {
        let cfg = SharpPeakConfig {
            m: 16,
            pi: 0.8,
            p_c: 0.1,
        };
        let table = verify_tn_domination(&cfg, 4, 500, 3).unwrap();
        assert_eq!(table.rows.len(), 5 * 18);
        for r in table.rows.iter().filter(|r| r.n == 0) {
            assert_eq!(r.dominated, r.dominating);
        }
        for r in table.rows.iter().filter(|r| r.k > 16) {
            assert_eq!(r.dominated, 0.0);
        }
        assert!(table.passed(), "{:?}", table.rows.iter().find(|r| !r.pass));
    }

    #[test]
    fn nstar_preconditions() {
        let cfg = SharpPeakConfig {
            m: 16,
            pi: 0.8,
            p_c: 0.1,
        };
        assert!(verify_nstar_domination(&cfg, 0.2, 3, 10, 0, 1).is_err());
        assert!(verify_nstar_domination(&cfg, 0.04, 3, 10, 32, 1).is_err());
        let t = verify_nstar_domination(&cfg, 0.04, 3, 200, 0, 1).unwrap();
        assert!(t
            .rows
            .iter()
            .filter(|r| r.n == 0)
            .all(|r| r.dominated == r.dominating));
    }

    #[test]
    fn d_recursion_holds() {
        let cfg = SharpPeakConfig {
            m: 32,
            pi: 0.8,
            p_c: 0.3,
        };
        let r = measure_tau2_and_d(&cfg, 8, 200, 5).unwrap();
        assert_eq!(r.max_d[0], 0);
        assert_eq!(r.recursion_violations, 0);
        assert_eq!(r.steps_checked, 200 * 8);
    }

    #[test]
    fn one_step_on_valley_landscape_reaches_several_states() {
        // 1111 -> 2, 0000 -> 1, everything else 0.2
        let mut values = vec![0.2; 16];
        values[0] = 1.0;
        values[15] = 2.0;
        let landscape = LandscapeSpec::table(4, values).unwrap();
        let mut members = vec![Chromosome::new(BitString::ones(4), true)];
        members.extend((1..6).map(|_| Chromosome::new(BitString::zeros(4), false)));
        let initial = Population::new(members, &landscape).unwrap();
        let cfg = OneStepConfig {
            landscape,
            initial,
            pi: 1.3,
            p_c: 0.1,
            samples: 2_000,
            max_generations: 30,
            batch: 500,
            max_batches: 40,
            seed: 9,
        };
        let report = verify_one_step_dominance(&cfg).unwrap();
        assert!(
            report.samples[2] > 0 && report.samples[3] > 0,
            "{:?}",
            report.samples
        );
        assert_eq!(
            report.violations(),
            0,
            "{:?}",
            report.rows.iter().find(|r| !r.pass)
        );
        for r in report.rows.iter().filter(|r| r.j == 0) {
            assert_eq!((r.ga_tail, r.chain_tail), (1.0, 1.0));
        }
    }
}
