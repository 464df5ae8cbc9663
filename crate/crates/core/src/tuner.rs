//! Generation-by-generation control of `p_C` and `p_M` keeping `pi` at a
//! target slightly above 1.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{next_generation, Operators, Population, PopulationStats};
use crate::landscape::LandscapeSpec;
use crate::probability::pi_parameter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adjust {
    PM,
    PC,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub const UNIT: Bounds = Bounds { lo: 0.0, hi: 1.0 };

    fn clamp(&self, x: f64) -> (f64, bool) {
        if x < self.lo {
            (self.lo, true)
        } else if x > self.hi {
            (self.hi, true)
        } else {
            (x, false)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunerPolicy {
    pub target_pi: f64,
    pub adjust: Adjust,
    pub p_c_bounds: Bounds,
    pub p_m_bounds: Bounds,
}

impl Default for TunerPolicy {
    fn default() -> Self {
        TunerPolicy {
            target_pi: 1.1,
            adjust: Adjust::PM,
            p_c_bounds: Bounds::UNIT,
            p_m_bounds: Bounds::UNIT,
        }
    }
}

impl TunerPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_pi > 1.0 && self.target_pi.is_finite()) {
            return Err(Error::config(
                "target_pi",
                format!("{} must be > 1", self.target_pi),
            ));
        }
        for (name, b) in [
            ("p_c_bounds", self.p_c_bounds),
            ("p_m_bounds", self.p_m_bounds),
        ] {
            if !(0.0 <= b.lo && b.lo <= b.hi && b.hi <= 1.0) {
                return Err(Error::config(
                    name,
                    format!("need 0 <= lo <= hi <= 1, got [{}, {}]", b.lo, b.hi),
                ));
            }
        }
        Ok(())
    }

    /// Both parameters pinned to the given values.
    pub fn frozen(p_c: f64, p_m: f64) -> Self {
        TunerPolicy {
            target_pi: 1.1,
            adjust: Adjust::Both,
            p_c_bounds: Bounds { lo: p_c, hi: p_c },
            p_m_bounds: Bounds { lo: p_m, hi: p_m },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub p_c: f64,
    pub p_m: f64,
    /// The returned parameters give exactly the target `pi`.
    pub feasible: bool,
}

fn solve_pm(ratio: f64, p_c: f64, ell: usize, target: f64, b: Bounds) -> (f64, bool) {
    let keep = target / (ratio * (1.0 - p_c));
    if !(keep > 0.0 && keep <= 1.0) {
        return (b.lo, false);
    }
    let (p, clamped) = b.clamp(1.0 - keep.powf(1.0 / ell as f64));
    (p, !clamped)
}

fn solve_pc(ratio: f64, p_m: f64, ell: usize, target: f64, b: Bounds) -> (f64, bool) {
    let p = 1.0 - target / (ratio * (1.0 - p_m).powi(ell as i32));
    if !(0.0..=1.0).contains(&p) {
        return (b.lo, false);
    }
    let (p, clamped) = b.clamp(p);
    (p, !clamped)
}

/// New `(p_C, p_M)` with `(f*/f_bar)(1 - p_C)(1 - p_M)^ell = target_pi`,
/// solved in closed form for the free parameter. When no value within the
/// bounds works, the free parameters go to their lower bounds (or the
/// nearest bound after clamping) and `feasible` is false.
pub fn adapt_parameters(
    stats: &PopulationStats,
    current: (f64, f64),
    ell: usize,
    policy: &TunerPolicy,
) -> Tuning {
    let ratio = stats.f_star / stats.f_bar;
    let (p_c, p_m) = current;
    let target = policy.target_pi;
    match policy.adjust {
        Adjust::PM => {
            let (p_m, feasible) = solve_pm(ratio, p_c, ell, target, policy.p_m_bounds);
            Tuning { p_c, p_m, feasible }
        }
        Adjust::PC => {
            let (p_c, feasible) = solve_pc(ratio, p_m, ell, target, policy.p_c_bounds);
            Tuning { p_c, p_m, feasible }
        }
        Adjust::Both => {
            let (p_c, _) = policy.p_c_bounds.clamp(p_c);
            let (p_m, feasible) = solve_pm(ratio, p_c, ell, target, policy.p_m_bounds);
            if feasible {
                return Tuning { p_c, p_m, feasible };
            }
            let p_c = policy.p_c_bounds.lo;
            let (p_m, feasible) = solve_pm(ratio, p_c, ell, target, policy.p_m_bounds);
            Tuning { p_c, p_m, feasible }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub gen: usize,
    /// `pi` of the parameters used to build the next generation.
    pub pi: f64,
    pub p_c: f64,
    pub p_m: f64,
    pub f_star: f64,
    pub f_bar: f64,
    pub feasible: bool,
    pub n_master: usize,
}

/// Runs `horizon` generations, re-tuning before each one from the current
/// statistics. Row `n` describes generation `n` and the parameters chosen
/// for the step out of it.
pub fn run_adaptive_ga<R: Rng + ?Sized>(
    landscape: &LandscapeSpec,
    initial: &Population,
    start: (f64, f64),
    policy: &TunerPolicy,
    horizon: usize,
    rng: &mut R,
) -> Result<(Vec<TelemetryRow>, Population)> {
    policy.validate()?;
    Operators::new(start.0, start.1)?;
    let ell = landscape.ell();
    let mut params = start;
    let mut pop = initial.clone();
    let mut rows = Vec::with_capacity(horizon + 1);
    for gen in 0..=horizon {
        let stats = pop.stats(0.0);
        let t = adapt_parameters(&stats, params, ell, policy);
        params = (t.p_c, t.p_m);
        rows.push(TelemetryRow {
            gen,
            pi: pi_parameter(stats.f_star, stats.f_bar, t.p_c, t.p_m, ell),
            p_c: t.p_c,
            p_m: t.p_m,
            f_star: stats.f_star,
            f_bar: stats.f_bar,
            feasible: t.feasible,
            n_master: stats.n_master,
        });
        if gen < horizon {
            pop = next_generation(&pop, landscape, &Operators::new(t.p_c, t.p_m)?, rng)?;
        }
    }
    Ok((rows, pop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn stats(f_star: f64, f_bar: f64) -> PopulationStats {
        PopulationStats {
            f_star,
            f_bar,
            n_master: 1,
            n_descendants: 1,
            n_at_least: 1,
        }
    }

    #[test]
    fn closed_form_pm() {
        let t = adapt_parameters(&stats(2.0, 1.0), (0.1, 0.3), 10, &TunerPolicy::default());
        assert!(t.feasible);
        assert_eq!(t.p_c, 0.1);
        assert_relative_eq!(t.p_m, 1.0 - (1.1f64 / 1.8).powf(0.1), epsilon = 1e-15);
        assert_relative_eq!(t.p_m, 0.048_054_647_343_183_54, epsilon = 1e-15);
        assert_relative_eq!(
            pi_parameter(2.0, 1.0, t.p_c, t.p_m, 10),
            1.1,
            epsilon = 1e-12
        );
    }

    #[test]
    fn flat_population_is_infeasible() {
        for adjust in [Adjust::PM, Adjust::PC, Adjust::Both] {
            let policy = TunerPolicy {
                adjust,
                p_c_bounds: Bounds { lo: 0.05, hi: 0.9 },
                p_m_bounds: Bounds { lo: 0.001, hi: 0.5 },
                ..TunerPolicy::default()
            };
            let t = adapt_parameters(&stats(1.0, 1.0), (0.3, 0.01), 16, &policy);
            assert!(!t.feasible);
            match adjust {
                Adjust::PM => assert_eq!(t.p_m, 0.001),
                Adjust::PC => assert_eq!(t.p_c, 0.05),
                Adjust::Both => assert_eq!((t.p_c, t.p_m), (0.05, 0.001)),
            }
        }
    }

    #[test]
    fn pc_adjustment() {
        let policy = TunerPolicy {
            adjust: Adjust::PC,
            ..TunerPolicy::default()
        };
        let t = adapt_parameters(&stats(2.0, 1.0), (0.5, 0.01), 8, &policy);
        assert!(t.feasible);
        assert_eq!(t.p_m, 0.01);
        assert_relative_eq!(
            pi_parameter(2.0, 1.0, t.p_c, t.p_m, 8),
            1.1,
            epsilon = 1e-12
        );
    }

    #[test]
    fn both_falls_back_to_minimal_crossover() {
        let policy = TunerPolicy {
            adjust: Adjust::Both,
            p_c_bounds: Bounds { lo: 0.0, hi: 1.0 },
            ..TunerPolicy::default()
        };
        // with p_C = 0.6 even p_M = 0 gives pi = 0.8
        let t = adapt_parameters(&stats(2.0, 1.0), (0.6, 0.01), 8, &policy);
        assert!(t.feasible);
        assert_eq!(t.p_c, 0.0);
        assert_relative_eq!(
            pi_parameter(2.0, 1.0, t.p_c, t.p_m, 8),
            1.1,
            epsilon = 1e-12
        );
    }

    #[test]
    fn invalid_policies() {
        assert!(TunerPolicy {
            target_pi: 1.0,
            ..TunerPolicy::default()
        }
        .validate()
        .is_err());
        let bad = TunerPolicy {
            p_m_bounds: Bounds { lo: 0.5, hi: 0.1 },
            ..TunerPolicy::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn frozen_policy_reproduces_plain_ga() {
        let f = LandscapeSpec::sharp_peak(16).unwrap();
        let pop = Population::sharp_peak_initial(16, &f).unwrap();
        let (rows, last) = run_adaptive_ga(
            &f,
            &pop,
            (0.2, 0.02),
            &TunerPolicy::frozen(0.2, 0.02),
            10,
            &mut stream(3),
        )
        .unwrap();
        let ops = Operators::new(0.2, 0.02).unwrap();
        let mut rng = stream(3);
        let mut plain = pop.clone();
        for _ in 0..10 {
            plain = next_generation(&plain, &f, &ops, &mut rng).unwrap();
        }
        assert_eq!(last.members(), plain.members());
        assert!(rows.iter().all(|r| r.p_c == 0.2 && r.p_m == 0.02));
    }

    #[test]
    fn telemetry_pi_is_consistent() {
        let f = LandscapeSpec::sharp_peak(16).unwrap();
        let pop = Population::sharp_peak_initial(16, &f).unwrap();
        let (rows, _) = run_adaptive_ga(
            &f,
            &pop,
            (0.1, 0.05),
            &TunerPolicy::default(),
            12,
            &mut stream(8),
        )
        .unwrap();
        for r in &rows {
            assert_eq!(r.pi, pi_parameter(r.f_star, r.f_bar, r.p_c, r.p_m, 16));
            if r.feasible {
                assert_relative_eq!(r.pi, 1.1, epsilon = 1e-9);
            }
        }
    }

    proptest! {
        #[test]
        fn feasible_tunings_satisfy_log_inequality(
            ratio in 1.0f64..4.0, p_c in 0.0f64..0.9, p_m in 0.0f64..0.2, ell in 2usize..200, target in 1.01f64..2.0,
        ) {
            let policy = TunerPolicy { target_pi: target, ..TunerPolicy::default() };
            let t = adapt_parameters(&stats(ratio, 1.0), (p_c, p_m), ell, &policy);
            prop_assert!((0.0..=1.0).contains(&t.p_c) && (0.0..=1.0).contains(&t.p_m));
            if t.feasible {
                prop_assert!((pi_parameter(ratio, 1.0, t.p_c, t.p_m, ell) - target).abs() < 1e-9);
                prop_assert!(ell as f64 * t.p_m + t.p_c < ratio.ln());
            }
        }
    }
}
