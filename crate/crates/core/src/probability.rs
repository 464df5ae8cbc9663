//! Laws on the nonnegative integers and the inequalities used to compare them:
//! stochastic order via upper tails, Binomial-versus-Poisson domination, the
//! Poisson tail bound, Hoeffding's inequality, and Chernoff bounds through
//! Cramér transforms.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::stats::dkw_epsilon;

/// Rigorous upper bound on the mass dropped when truncating a Poisson law.
pub const TRUNCATION_RESIDUAL: f64 = 1e-15;

/// Tolerance on total mass for explicit pmfs.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// `(f_star / f_bar) (1 - p_c) (1 - p_m)^ell`, the mean number of exact
/// copies of a best-fit chromosome per generation.
pub fn pi_parameter(f_star: f64, f_bar: f64, p_c: f64, p_m: f64, ell: usize) -> f64 {
    (f_star / f_bar) * (1.0 - p_c) * (1.0 - p_m).powi(ell as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LawKind {
    Poisson {
        lambda: f64,
    },
    Binomial {
        n: u64,
        p: f64,
    },
    /// Explicit or empirical pmf.
    Explicit,
}

/// A probability law on `{0, 1, 2, ...}`.
///
/// Infinite-support laws keep the pmf up to a truncation point and carry
/// `residual`, an upper bound on the mass beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    kind: LawKind,
    pmf: Vec<f64>,
    /// `tails[i]` = retained mass on `[i, len)`.
    tails: Vec<f64>,
    residual: f64,
    samples: Option<usize>,
}

fn suffix_sums(pmf: &[f64]) -> Vec<f64> {
    let mut tails = vec![0.0; pmf.len() + 1];
    for i in (0..pmf.len()).rev() {
        tails[i] = tails[i + 1] + pmf[i];
    }
    tails
}

impl DiscreteLaw {
    fn build(kind: LawKind, pmf: Vec<f64>, residual: f64, samples: Option<usize>) -> Self {
        let tails = suffix_sums(&pmf);
        DiscreteLaw {
            kind,
            pmf,
            tails,
            residual,
            samples,
        }
    }

    pub fn point_mass(k: usize) -> Self {
        let mut pmf = vec![0.0; k + 1];
        pmf[k] = 1.0;
        Self::build(LawKind::Explicit, pmf, 0.0, None)
    }

    /// Explicit pmf; must be nonnegative and sum to 1 within 1e-12.
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::Domain("empty pmf".into()));
        }
        if let Some(p) = pmf.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::Domain(format!("pmf entry {p} is not a probability")));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Domain(format!("pmf sums to {total}, not 1")));
        }
        Ok(Self::build(LawKind::Explicit, pmf, 0.0, None))
    }

    /// Empirical law of a sample; remembers the sample size for DKW bands.
    pub fn empirical(samples: &[u64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("empty sample".into()));
        }
        let max = *samples.iter().max().expect("non-empty") as usize;
        let mut counts = vec![0u64; max + 1];
        for &s in samples {
            counts[s as usize] += 1;
        }
        let n = samples.len() as f64;
        let pmf = counts.iter().map(|&c| c as f64 / n).collect();
        Ok(Self::build(
            LawKind::Explicit,
            pmf,
            0.0,
            Some(samples.len()),
        ))
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Domain(format!(
                "Poisson parameter {lambda} must be >= 0"
            )));
        }
        if lambda == 0.0 {
            let mut law = Self::point_mass(0);
            law.kind = LawKind::Poisson { lambda };
            return Ok(law);
        }
        // first K >= lambda with (lambda e / K)^K below the residual target
        let mut k = lambda.ceil().max(1.0);
        while k * ((lambda / k).ln() + 1.0) > TRUNCATION_RESIDUAL.ln() {
            k += 1.0;
        }
        let residual = (k * ((lambda / k).ln() + 1.0)).exp();
        let kmax = k as usize;
        let ln_lambda = lambda.ln();
        let pmf = (0..kmax)
            .map(|j| (-lambda + j as f64 * ln_lambda - ln_gamma(j as f64 + 1.0)).exp())
            .collect();
        Ok(Self::build(
            LawKind::Poisson { lambda },
            pmf,
            residual,
            None,
        ))
    }

    pub fn binomial(n: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!(
                "binomial parameter {p} outside [0, 1]"
            )));
        }
        let pmf = (0..=n)
            .map(|k| {
                if p == 0.0 {
                    (k == 0) as u8 as f64
                } else if p == 1.0 {
                    (k == n) as u8 as f64
                } else {
                    (ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
                }
            })
            .collect();
        Ok(Self::build(LawKind::Binomial { n, p }, pmf, 0.0, None))
    }

    /// Law of `c X`.
    pub fn scaled(&self, c: usize) -> Self {
        if c == 0 {
            return Self::point_mass(0);
        }
        let mut pmf = vec![0.0; (self.pmf.len() - 1) * c + 1];
        for (k, &p) in self.pmf.iter().enumerate() {
            pmf[k * c] = p;
        }
        Self::build(LawKind::Explicit, pmf, self.residual, None)
    }

    /// Law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &DiscreteLaw) -> Self {
        let mut pmf = vec![0.0; self.pmf.len() + other.pmf.len() - 1];
        for (i, &a) in self.pmf.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.pmf.iter().enumerate() {
                pmf[i + j] += a * b;
            }
        }
        // dropped mass of the product is at most the sum of the dropped masses
        Self::build(LawKind::Explicit, pmf, self.residual + other.residual, None)
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    /// Upper bound on the mass beyond the retained pmf.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn sample_size(&self) -> Option<usize> {
        self.samples
    }

    /// Largest index carried by the pmf.
    pub fn support_len(&self) -> usize {
        self.pmf.len()
    }

    /// Lower estimate of `P(X >= i)` (retained mass only).
    pub fn tail_lower(&self, i: usize) -> f64 {
        if i == 0 {
            return 1.0;
        }
        self.tails.get(i).copied().unwrap_or(0.0).min(1.0)
    }

    /// Upper estimate of `P(X >= i)` (retained mass plus residual).
    pub fn tail_upper(&self, i: usize) -> f64 {
        if i == 0 {
            return 1.0;
        }
        (self.tail_lower(i) + self.residual).min(1.0)
    }

    pub fn mean(&self) -> f64 {
        match self.kind {
            LawKind::Poisson { lambda } => lambda,
            LawKind::Binomial { n, p } => n as f64 * p,
            LawKind::Explicit => self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum(),
        }
    }

    /// Smallest and largest points of the support (`None` = unbounded).
    fn support_bounds(&self) -> (f64, Option<f64>) {
        match self.kind {
            LawKind::Poisson { lambda } => (0.0, if lambda == 0.0 { Some(0.0) } else { None }),
            _ => {
                let lo = self.pmf.iter().position(|&p| p > 0.0).unwrap_or(0);
                let hi = self.pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0);
                (lo as f64, Some(hi as f64))
            }
        }
    }

    /// `ln E exp(t X)`.
    pub fn log_laplace(&self, t: f64) -> f64 {
        match self.kind {
            LawKind::Poisson { lambda } => lambda * t.exp_m1(),
            LawKind::Binomial { n, p } => {
                let n = n as f64;
                if p == 0.0 {
                    0.0
                } else if p == 1.0 {
                    n * t
                } else if t > 0.0 {
                    n * (t + (p + (1.0 - p) * (-t).exp()).ln())
                } else {
                    n * (1.0 - p + p * t.exp()).ln()
                }
            }
            LawKind::Explicit => {
                let shift = self
                    .pmf
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(k, _)| t * k as f64)
                    .fold(f64::NEG_INFINITY, f64::max);
                let s: f64 = self
                    .pmf
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(k, &p)| p * (t * k as f64 - shift).exp())
                    .sum();
                shift + s.ln()
            }
        }
    }

    /// Derivative of [`log_laplace`](Self::log_laplace): the mean of the
    /// exponentially tilted law.
    fn tilted_mean(&self, t: f64) -> f64 {
        match self.kind {
            LawKind::Poisson { lambda } => lambda * t.exp(),
            LawKind::Binomial { n, p } => {
                let n = n as f64;
                if p == 0.0 {
                    0.0
                } else if p == 1.0 {
                    n
                } else {
                    n / (1.0 + (1.0 - p) / p * (-t).exp())
                }
            }
            LawKind::Explicit => {
                let shift = self
                    .pmf
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(k, _)| t * k as f64)
                    .fold(f64::NEG_INFINITY, f64::max);
                let (mut num, mut den) = (0.0, 0.0);
                for (k, &p) in self.pmf.iter().enumerate() {
                    if p > 0.0 {
                        let w = p * (t * k as f64 - shift).exp();
                        num += k as f64 * w;
                        den += w;
                    }
                }
                num / den
            }
        }
    }

    /// Cramér transform `sup_t (t y - ln E exp(t X))`, by bracketed search
    /// for the stationary point of the concave objective.
    pub fn cramer(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::Domain(format!(
                "Cramér transform at non-finite point {y}"
            )));
        }
        let (lo, hi) = self.support_bounds();
        if y < lo || hi.is_some_and(|h| y > h) {
            return Ok(f64::INFINITY);
        }
        if hi == Some(lo) {
            return Ok(0.0);
        }
        let mean = self.mean();
        if y == mean {
            return Ok(0.0);
        }
        if y == lo {
            return Ok(-self.point_probability(lo as usize).ln());
        }
        if hi == Some(y) {
            return Ok(-self.point_probability(y as usize).ln());
        }
        let objective = |t: f64| t * y - self.log_laplace(t);
        let dir = if y > mean { 1.0 } else { -1.0 };
        let (mut a, mut b) = (0.0f64, dir);
        let mut expansions = 0;
        while (self.tilted_mean(b) - y) * dir < 0.0 {
            a = b;
            b *= 2.0;
            expansions += 1;
            if expansions > 12 || !self.tilted_mean(b).is_finite() {
                return Err(Error::Numerical(format!(
                    "could not bracket the maximiser of t*{y} - log_laplace(t): \
                     searched t up to {b:e}, tilted mean there {}",
                    self.tilted_mean(b)
                )));
            }
        }
        for _ in 0..200 {
            if (b - a).abs() <= 1e-10 * b.abs().max(1.0) * 1e-2 {
                break;
            }
            let mid = 0.5 * (a + b);
            if (self.tilted_mean(mid) - y) * dir < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        let t = 0.5 * (a + b);
        let value = objective(t).max(objective(a)).max(objective(b));
        if !value.is_finite() {
            return Err(Error::Numerical(format!(
                "Cramér transform at {y} evaluated to {value} (t = {t})"
            )));
        }
        Ok(value.max(0.0))
    }

    fn point_probability(&self, k: usize) -> f64 {
        match self.kind {
            LawKind::Poisson { lambda } => {
                (-lambda + k as f64 * lambda.ln() - ln_gamma(k as f64 + 1.0)).exp()
            }
            _ => self.prob(k),
        }
    }
}

/// Largest violation `max_i (mu[i, inf) - nu[i, inf))` over the joint
/// support, using the lower tail estimate for `mu` and the upper one for
/// `nu`; nonpositive when no truncation-robust violation exists.
pub fn dominance_margin(mu: &DiscreteLaw, nu: &DiscreteLaw) -> f64 {
    let n = mu.support_len().max(nu.support_len());
    (0..=n)
        .map(|i| mu.tail_lower(i) - nu.tail_upper(i))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `mu ≼ nu`: every upper tail of `mu` is at most the matching tail of `nu`
/// plus `tol`.
///
/// A point is counted as a violation only when it persists after giving each
/// law the benefit of its truncation residual, so truncated Poisson laws are
/// never reported as violating because of mass that was dropped.
pub fn stochastic_dominates(mu: &DiscreteLaw, nu: &DiscreteLaw, tol: f64) -> bool {
    dominance_margin(mu, nu) <= tol
}

/// 0 between exact laws; otherwise the sum of the 99% DKW half-widths of the
/// empirical laws involved.
pub fn default_dominance_tolerance(mu: &DiscreteLaw, nu: &DiscreteLaw) -> f64 {
    [mu, nu]
        .iter()
        .filter_map(|l| l.sample_size())
        .map(|n| dkw_epsilon(n, 0.99))
        .sum()
}

/// `(1 - p)^n >= exp(-lambda)`, the condition under which Binomial(n, p) is
/// dominated by Poisson(lambda).
pub fn binomial_poisson_condition(n: u64, p: f64, lambda: f64) -> bool {
    if p >= 1.0 {
        return false;
    }
    n as f64 * (1.0 - p).ln() >= -lambda
}

/// `(lambda e / t)^t`, an upper bound on `P(Y >= t)` for `Y ~ Poisson(lambda)`.
pub fn poisson_tail_bound(lambda: f64, t: f64) -> Result<f64> {
    if !(lambda > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "need lambda > 0 and finite t, got ({lambda}, {t})"
        )));
    }
    if t < lambda {
        return Err(Error::Domain(format!(
            "tail bound needs t >= lambda, got t = {t} < {lambda}"
        )));
    }
    Ok((t * ((lambda / t).ln() + 1.0)).exp())
}

/// Closed-form Cramér transform of `alpha Y`, `Y ~ Poisson(lambda)`:
/// `(x/alpha) ln(x/(lambda alpha)) - x/alpha + lambda`.
pub fn cramer_scaled_poisson(lambda: f64, alpha: f64, x: f64) -> Result<f64> {
    let ratio = x / (lambda * alpha);
    if !(lambda > 0.0) || alpha == 0.0 || !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::Domain(format!(
            "need x / (lambda alpha) > 0, got lambda = {lambda}, alpha = {alpha}, x = {x}"
        )));
    }
    let y = x / alpha;
    Ok(y * ratio.ln() - y + lambda)
}

/// Hoeffding: `P(X < t) <= exp(-(2/n)(np - t)^2)` for `X ~ Binomial(n, p)`
/// and `t < np`.
pub fn hoeffding_lower_tail(n: u64, p: f64, t: f64) -> Result<f64> {
    let mean = n as f64 * p;
    if n == 0 || !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "invalid binomial parameters ({n}, {p})"
        )));
    }
    if !(t < mean) {
        return Err(Error::Domain(format!(
            "Hoeffding bound needs t < np = {mean}, got {t}"
        )));
    }
    Ok((-2.0 / n as f64 * (mean - t).powi(2)).exp())
}

/// Chebyshev exponential inequality: `P(mean of n draws >= x) <=
/// exp(-n Λ*(x))` for `x` at or above the mean of `law`.
pub fn chernoff_sum_bound(law: &DiscreteLaw, n: u64, x: f64) -> Result<f64> {
    let mean = law.mean();
    if n == 0 {
        return Err(Error::Domain("need at least one draw".into()));
    }
    if x < mean - 1e-12 * mean.abs().max(1.0) {
        return Err(Error::Domain(format!("need x >= mean = {mean}, got {x}")));
    }
    let rate = law.cramer(x.max(mean))?;
    Ok((-(n as f64) * rate).exp())
}

/// `(Λ*_{αX}(x), Λ*_{αY}(x))` for `X ~ Binomial(n, p)` and `Y ~ Poisson(np)`,
/// both by numerical maximisation. The first component is never smaller.
pub fn cramer_binomial_vs_poisson(n: u64, p: f64, alpha: f64, x: f64) -> Result<(f64, f64)> {
    if alpha == 0.0 || !alpha.is_finite() || !x.is_finite() {
        return Err(Error::Domain(format!(
            "need finite nonzero alpha, got alpha = {alpha}, x = {x}"
        )));
    }
    // sup_t (t x - Λ_X(alpha t)) = Λ*_X(x / alpha)
    let y = x / alpha;
    if y < 0.0 {
        return Err(Error::Domain(format!(
            "x / alpha = {y} lies outside the support of both laws"
        )));
    }
    let bin = DiscreteLaw::binomial(n, p)?;
    let poi = DiscreteLaw::poisson(n as f64 * p)?;
    Ok((bin.cramer(y)?, poi.cramer(y)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use statrs::distribution::{Binomial, DiscreteCDF, Poisson};

    #[test]
    fn pi_examples() {
        assert_eq!(pi_parameter(2.0, 1.0, 0.0, 0.0, 10), 2.0);
        assert_eq!(pi_parameter(2.0, 1.0, 0.5, 0.0, 10), 1.0);
        // m = 3 sharp peak: f_bar = 4/3
        assert_relative_eq!(
            pi_parameter(2.0, 4.0 / 3.0, 0.1, 0.01, 5),
            1.283_836_567_365,
            epsilon = 1e-12
        );
    }

    #[test]
    fn law_masses() {
        for lambda in [0.0, 0.3, 1.0, 4.0, 37.5, 250.0] {
            let law = DiscreteLaw::poisson(lambda).unwrap();
            let total: f64 = law.pmf().iter().sum();
            assert!(
                total <= 1.0 + 1e-12 && total + law.residual() >= 1.0 - 1e-12,
                "{lambda}: {total}"
            );
            assert!(law.residual() < 1e-12);
        }
        let b = DiscreteLaw::binomial(30, 0.3).unwrap();
        assert_relative_eq!(b.pmf().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(DiscreteLaw::from_pmf(vec![0.5, 0.4]).is_err());
        assert!(DiscreteLaw::from_pmf(vec![0.5, 0.6, -0.1]).is_err());
    }

    #[test]
    fn tails_match_statrs() {
        let law = DiscreteLaw::poisson(4.0).unwrap();
        let oracle = Poisson::new(4.0).unwrap();
        for i in 1..30u64 {
            assert_relative_eq!(
                law.tail_lower(i as usize),
                oracle.sf(i - 1),
                epsilon = 1e-12
            );
        }
        let law = DiscreteLaw::binomial(20, 0.35).unwrap();
        let oracle = Binomial::new(0.35, 20).unwrap();
        for i in 1..=20u64 {
            assert_relative_eq!(
                law.tail_lower(i as usize),
                oracle.sf(i - 1),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn dominance_examples() {
        let zero = DiscreteLaw::point_mass(0);
        for law in [
            DiscreteLaw::poisson(0.7).unwrap(),
            DiscreteLaw::binomial(5, 0.2).unwrap(),
            DiscreteLaw::point_mass(3),
        ] {
            assert!(stochastic_dominates(&zero, &law, 0.0));
        }
        let b = DiscreteLaw::binomial(10, 0.05).unwrap();
        let p = DiscreteLaw::poisson(0.6).unwrap();
        assert!(stochastic_dominates(&b, &p, 0.0));
        assert!(!stochastic_dominates(&p, &b, 0.0));
        let small = DiscreteLaw::poisson(0.5).unwrap();
        let big = DiscreteLaw::poisson(1.0).unwrap();
        assert!(stochastic_dominates(&small, &big, 0.0));
        assert!(!stochastic_dominates(&big, &small, 0.0));
    }

    #[test]
    fn binomial_poisson_condition_examples() {
        assert!(binomial_poisson_condition(10, 0.05, 0.6));
        assert!(binomial_poisson_condition(7, 0.0, 0.01));
        assert!(!binomial_poisson_condition(1, 0.9, 0.1));
    }

    #[test]
    fn poisson_tail_bound_examples() {
        let b = poisson_tail_bound(1.0, 4.0).unwrap();
        assert_relative_eq!(b, 0.213_274_023_566_969_6, epsilon = 1e-12);
        assert!(b >= 0.018_988_156_876_153_81);
        assert_relative_eq!(
            poisson_tail_bound(2.5, 2.5).unwrap(),
            2.5f64.exp(),
            epsilon = 1e-12
        );
        let b = poisson_tail_bound(4.0, 16.0).unwrap();
        assert_relative_eq!(b, 2.068_958_832_069_268_6e-3, epsilon = 1e-15);
        assert!(b >= 4.892_610_719_877_837e-6);
        assert!(poisson_tail_bound(2.0, 1.0).is_err());
    }

    #[test]
    fn cramer_scaled_poisson_examples() {
        assert_eq!(cramer_scaled_poisson(3.0, 1.0, 3.0).unwrap(), 0.0);
        assert_eq!(cramer_scaled_poisson(4.0, 2.0, 8.0).unwrap(), 0.0);
        let v = cramer_scaled_poisson(1.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(v, 2.0 * 2f64.ln() - 1.0, epsilon = 1e-14);
        // numerical supremum of t x - lambda (e^{alpha t} - 1) on a fine grid
        let sup = (0..400_000)
            .map(|k| -10.0 + k as f64 * 5e-5)
            .map(|t| 2.0 * t - t.exp_m1())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(v, sup, epsilon = 1e-8);
        assert!(cramer_scaled_poisson(1.0, -1.0, 2.0).is_err());
        assert!(cramer_scaled_poisson(1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn numerical_cramer_matches_closed_form() {
        for &(lambda, alpha, x) in &[
            (1.0, 1.0, 2.0),
            (4.0, -1.0, -3.0),
            (0.7, 2.0, 0.3),
            (12.0, 1.5, 30.0),
        ] {
            let law = DiscreteLaw::poisson(lambda).unwrap();
            let numeric = law.cramer(x / alpha).unwrap();
            let closed = cramer_scaled_poisson(lambda, alpha, x).unwrap();
            assert_relative_eq!(numeric, closed, epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    #[test]
    fn hoeffding_examples() {
        let b = hoeffding_lower_tail(100, 0.5, 40.0).unwrap();
        assert_relative_eq!(b, (-2f64).exp(), epsilon = 1e-15);
        assert!(b >= 0.017_600_100_108_852_396);
        assert!(hoeffding_lower_tail(100, 0.5, 50.0 - 1e-9).unwrap() > 1.0 - 1e-15);
        assert!(hoeffding_lower_tail(100, 0.5, 50.0).is_err());
        let mut prev = 1.0;
        for t in (0..50).rev() {
            let v = hoeffding_lower_tail(100, 0.5, t as f64).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn chernoff_examples() {
        let bern = DiscreteLaw::binomial(1, 0.5).unwrap();
        assert_eq!(chernoff_sum_bound(&bern, 10, 0.5).unwrap(), 1.0);
        let b = chernoff_sum_bound(&bern, 10, 0.8).unwrap();
        assert!(b >= 0.054_687_5, "{b}");
        let explicit = DiscreteLaw::from_pmf(vec![0.5, 0.5]).unwrap();
        assert_relative_eq!(
            chernoff_sum_bound(&explicit, 10, 0.8).unwrap(),
            b,
            epsilon = 1e-10
        );
        let poi = DiscreteLaw::poisson(1.0).unwrap();
        let b = chernoff_sum_bound(&poi, 1, 2.0).unwrap();
        assert_relative_eq!(b, 0.679_570_457_114_761_4, epsilon = 1e-10);
        assert!(b >= 0.264_241_117_657_115_3);
        assert!(chernoff_sum_bound(&poi, 1, 0.5).is_err());
    }

    #[test]
    fn cramer_binomial_vs_poisson_examples() {
        let (bx, py) = cramer_binomial_vs_poisson(20, 0.2, -1.0, -3.0).unwrap();
        assert_relative_eq!(bx, 0.167_572_353_524_048_98, epsilon = 1e-9);
        assert_relative_eq!(py, 0.136_953_782_644_657_18, epsilon = 1e-9);
        assert!(bx >= py);
        let (bx, py) = cramer_binomial_vs_poisson(10, 0.5, 1.0, 5.0).unwrap();
        assert_eq!((bx, py), (0.0, 0.0));
        let (bx, py) = cramer_binomial_vs_poisson(10, 0.0, 1.0, 0.0).unwrap();
        assert_eq!((bx, py), (0.0, 0.0));
        let (bx, py) = cramer_binomial_vs_poisson(10, 0.0, 1.0, 2.0).unwrap();
        assert!(bx >= py);
        assert!(cramer_binomial_vs_poisson(10, 0.2, 0.0, 1.0).is_err());
        assert!(cramer_binomial_vs_poisson(10, 0.2, 1.0, -1.0).is_err());
    }

    #[test]
    fn empirical_tolerance() {
        let e = DiscreteLaw::empirical(&[0, 1, 1, 2]).unwrap();
        assert_eq!(e.prob(1), 0.5);
        let p = DiscreteLaw::poisson(1.0).unwrap();
        assert_eq!(default_dominance_tolerance(&p, &p), 0.0);
        assert_relative_eq!(default_dominance_tolerance(&e, &p), dkw_epsilon(4, 0.99));
    }

    proptest! {
        #[test]
        fn dominance_is_reflexive_and_transitive(a in 0.05f64..3.0, b in 0.05f64..3.0, c in 0.05f64..3.0) {
            let mut ls = [a, b, c];
            ls.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let laws: Vec<_> = ls.iter().map(|&l| DiscreteLaw::poisson(l).unwrap()).collect();
            for l in &laws {
                prop_assert!(stochastic_dominates(l, l, 0.0));
            }
            prop_assert!(stochastic_dominates(&laws[0], &laws[1], 0.0));
            prop_assert!(stochastic_dominates(&laws[1], &laws[2], 0.0));
            prop_assert!(stochastic_dominates(&laws[0], &laws[2], 0.0));
        }

        #[test]
        fn binomial_below_poisson_when_condition_holds(n in 1u64..60, p in 0.0f64..0.5, slack in 0.0f64..2.0) {
            let lambda = -(n as f64) * (1.0 - p).ln() + slack + 1e-9;
            prop_assume!(binomial_poisson_condition(n, p, lambda));
            let bin = DiscreteLaw::binomial(n, p).unwrap();
            let poi = DiscreteLaw::poisson(lambda).unwrap();
            prop_assert!(stochastic_dominates(&bin, &poi, 1e-12));
        }
    }
}
