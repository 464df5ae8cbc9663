//! Small statistical helpers shared by the experiments: confidence intervals,
//! DKW bands, chi-square goodness of fit and least-squares fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Two-sided standard normal quantile for confidence level `level`.
pub fn normal_quantile(level: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    n.inverse_cdf(0.5 + level / 2.0)
}

/// A binomial proportion with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Proportion {
    /// Wilson score interval at confidence `level` (0.95 for the reports).
    pub fn wilson(successes: usize, trials: usize, level: f64) -> Self {
        if trials == 0 {
            return Proportion {
                successes,
                trials,
                estimate: 0.0,
                ci_lo: 0.0,
                ci_hi: 1.0,
            };
        }
        let z = normal_quantile(level);
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Proportion {
            successes,
            trials,
            estimate: p,
            ci_lo: (centre - half).max(0.0),
            ci_hi: (centre + half).min(1.0),
        }
    }

    pub fn standard_error(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let p = self.estimate;
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Difference `b - a` of two independent proportions and the half-width of its
/// normal-approximation interval at `level`.
pub fn proportion_difference(a: &Proportion, b: &Proportion, level: f64) -> (f64, f64) {
    let se = (a.standard_error().powi(2) + b.standard_error().powi(2)).sqrt();
    (b.estimate - a.estimate, normal_quantile(level) * se)
}

/// True unless `b` is significantly smaller than `a` at `level`.
pub fn not_significantly_smaller(a: &Proportion, b: &Proportion, level: f64) -> bool {
    let (diff, half) = proportion_difference(a, b, level);
    diff + half >= 0.0
}

/// True when `b` is significantly larger than `a` at `level`.
pub fn significantly_larger(a: &Proportion, b: &Proportion, level: f64) -> bool {
    let (diff, half) = proportion_difference(a, b, level);
    diff - half > 0.0
}

/// Dvoretzky–Kiefer–Wolfowitz half-width: with probability at least
/// `confidence`, an empirical CDF built from `n` samples stays within this
/// distance of the true CDF uniformly.
pub fn dkw_epsilon(n: usize, confidence: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let alpha = 1.0 - confidence;
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square goodness of fit of `observed` counts against the
/// probabilities `expected`.
///
/// Adjacent cells are pooled left to right until each pooled cell has an
/// expected count of at least `min_expected`; a remainder is merged into the
/// last pooled cell. Cells with zero expected probability must have zero
/// observations, otherwise the statistic is infinite.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], min_expected: f64) -> ChiSquareResult {
    assert_eq!(observed.len(), expected.len());
    let total: u64 = observed.iter().sum();
    let n = total as f64;
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected) {
        if p <= 0.0 && o > 0 {
            return ChiSquareResult {
                statistic: f64::INFINITY,
                dof: 0,
                p_value: 0.0,
            };
        }
        o_acc += o as f64;
        e_acc += p * n;
        if e_acc >= min_expected {
            pooled.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => pooled.push((o_acc, e_acc)),
        }
    }
    let statistic: f64 = pooled
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else { 0.0 })
        .sum();
    let dof = pooled.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let chi = ChiSquared::new(dof as f64).expect("positive dof");
        1.0 - chi.cdf(statistic)
    };
    ChiSquareResult {
        statistic,
        dof,
        p_value,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
