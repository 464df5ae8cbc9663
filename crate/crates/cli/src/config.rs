//! Experiment configuration.
//!
//! Every experiment reads the same flat set of keys, from a TOML document, from
//! command-line flags, or both (flags win). Keys an experiment does not use are
//! rejected, as are unknown keys in a document. Run options (`threads`,
//! `out_dir`) are kept apart from the experiment parameters so that the config
//! echo written into the outputs does not depend on them.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use sgalab_core::branching::ReproductionLaw;
use sgalab_core::experiments::solve_pm;
use sgalab_core::landscape::load_landscape;
use sgalab_core::lowerchain::LowerChainParams;
use sgalab_core::tuner::{Adjust, TunerPolicy};
use sgalab_core::{LandscapeSpec, Population};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SGALAB_OUT_DIR";

const DEFAULT_OUT_DIR: &str = "sgalab-out";

/// Keys accepted by every experiment.
const COMMON_KEYS: &[&str] = &["seed", "threads", "out_dir"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Disordered,
    Quasispecies,
    Sweep,
    DominanceTn,
    DominanceOnestep,
    DominanceNstar,
    Gw,
    Lowerchain,
    Tune,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Disordered => "disordered",
            Experiment::Quasispecies => "quasispecies",
            Experiment::Sweep => "sweep",
            Experiment::DominanceTn => "dominance-tn",
            Experiment::DominanceOnestep => "dominance-onestep",
            Experiment::DominanceNstar => "dominance-nstar",
            Experiment::Gw => "gw",
            Experiment::Lowerchain => "lowerchain",
            Experiment::Tune => "tune",
        }
    }

    fn keys(&self) -> &'static [&'static str] {
        match self {
            Experiment::Disordered => &["pi", "m", "p_c", "kappa", "replicas"],
            Experiment::Quasispecies => {
                &["pi", "m", "ell", "p_c", "kappa", "replicas", "landscape"]
            }
            Experiment::Sweep => &["m", "p_c", "pis", "kappa", "replicas"],
            Experiment::DominanceTn => &["pi", "m", "p_c", "horizon", "replicas"],
            Experiment::DominanceNstar => {
                &["pi", "m", "p_c", "eps", "horizon", "m_floor", "replicas"]
            }
            Experiment::DominanceOnestep => &[
                "pi",
                "m",
                "ell",
                "p_c",
                "samples",
                "max_generations",
                "batch",
                "max_batches",
                "landscape",
            ],
            Experiment::Gw => &["law", "lambda", "scale", "pi", "eps", "horizon", "replicas"],
            Experiment::Lowerchain => &[
                "pi", "m", "ell", "ratio", "p_c", "revive", "horizon", "replicas",
            ],
            Experiment::Tune => &[
                "m",
                "ell",
                "p_c",
                "p_m",
                "target_pi",
                "adjust",
                "horizon",
                "landscape",
            ],
        }
    }
}

/// Offspring laws the `gw` experiment can simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum LawName {
    /// `Poisson(lambda)`.
    Poisson,
    /// `scale * Poisson(lambda)`.
    ScaledPoisson,
    /// `Poisson(pi (1 + 3 eps)) + 2 Poisson(eps)`.
    NuStar,
}

/// Raw keys, as read from a document or from flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Critical parameter `pi`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
    /// Population size (even).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Chromosome length; defaults to `m`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    /// Crossover probability.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_c: Option<f64>,
    /// Per-bit mutation probability.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_m: Option<f64>,
    /// Horizon multiplier: runs last `ceil(kappa ln m)` generations.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Number of independent runs.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    /// Master seed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Grid of `pi` values for a sweep, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pis: Option<Vec<f64>>,
    /// Number of generations.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Smallest `m` accepted by `dominance-nstar`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_floor: Option<usize>,
    /// Conditioned transitions wanted per state.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_generations: Option<usize>,
    /// Trajectories per batch.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_batches: Option<usize>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<LawName>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<u32>,
    /// Fitness ratio `f* / f_bar` of the lower chain.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// Send state 0 to 1 in the lower chain.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub revive: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_pi: Option<f64>,
    /// Parameter moved by the tuner: p_m, p_c or both.
    #[arg(long, value_parser = parse_adjust)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjust: Option<Adjust>,
    /// Landscape document; defaults to the sharp peak of length `ell`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landscape: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Output directory; defaults to `$SGALAB_OUT_DIR`, then `sgalab-out`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn parse_adjust(s: &str) -> Result<Adjust, String> {
    match s {
        "p_m" => Ok(Adjust::PM),
        "p_c" => Ok(Adjust::PC),
        "both" => Ok(Adjust::Both),
        _ => Err(format!("expected p_m, p_c or both, got `{s}`")),
    }
}

impl Settings {
    /// Parses a TOML document.
    ///
    /// Keys are checked one at a time so that an unknown or mistyped key is
    /// reported by name.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = toml::from_str(text)
            .map_err(|e| CliError::config("config", e.message().trim().to_string()))?;
        let mut settings = Settings::default();
        for (key, value) in table {
            let mut single = toml::Table::new();
            single.insert(key.clone(), value);
            let one: Settings = single.try_into().map_err(|e: toml::de::Error| {
                let reason = e.message().trim().to_string();
                if reason.starts_with("unknown field") {
                    CliError::config(&key, "unknown key")
                } else {
                    CliError::config(&key, reason)
                }
            })?;
            settings = settings.overlay(&one);
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml(&text)
    }

    fn to_map(&self) -> Map<String, Value> {
        match serde_json::to_value(self) {
            Ok(Value::Object(map)) => map,
            _ => Map::new(),
        }
    }

    /// Keys set in `self`, in declaration order.
    pub fn keys(&self) -> Vec<String> {
        self.to_map().keys().cloned().collect()
    }

    /// `self` with every key set in `overrides` replaced.
    pub fn overlay(&self, overrides: &Settings) -> Settings {
        let mut map = self.to_map();
        map.extend(overrides.to_map());
        serde_json::from_value(Value::Object(map)).unwrap_or_else(|_| overrides.clone())
    }
}

/// Options that change how a run executes but not what it computes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub threads: usize,
    pub out_dir: PathBuf,
}

impl RunOptions {
    pub fn from_settings(s: &Settings) -> Self {
        let out_dir = s
            .out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        RunOptions {
            threads: s.threads.unwrap_or(0),
            out_dir,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisorderedParams {
    pub pi: f64,
    pub m: usize,
    pub p_c: f64,
    pub kappa: f64,
    pub replicas: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasispeciesParams {
    pub pi: f64,
    pub m: usize,
    pub ell: usize,
    pub p_c: f64,
    pub kappa: f64,
    pub replicas: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landscape: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepParams {
    pub m: usize,
    pub p_c: f64,
    pub pis: Vec<f64>,
    pub kappa: f64,
    pub replicas: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceTnParams {
    pub pi: f64,
    pub m: usize,
    pub p_c: f64,
    pub horizon: usize,
    pub replicas: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceNstarParams {
    pub pi: f64,
    pub m: usize,
    pub p_c: f64,
    pub eps: f64,
    pub horizon: usize,
    pub m_floor: usize,
    pub replicas: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceOnestepParams {
    pub pi: f64,
    pub m: usize,
    pub ell: usize,
    pub p_c: f64,
    pub samples: usize,
    pub max_generations: usize,
    pub batch: usize,
    pub max_batches: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landscape: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GwParams {
    pub law: LawName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub horizon: usize,
    pub replicas: usize,
    pub seed: u64,
}

impl GwParams {
    pub fn reproduction_law(&self) -> Result<ReproductionLaw, CliError> {
        let need = |v: Option<f64>, field: &str| {
            v.ok_or_else(|| CliError::config(field, "required for this law"))
        };
        let law = match self.law {
            LawName::Poisson => ReproductionLaw::poisson(need(self.lambda, "lambda")?),
            LawName::ScaledPoisson => {
                let scale = self
                    .scale
                    .ok_or_else(|| CliError::config("scale", "required for this law"))?;
                ReproductionLaw::scaled_poisson(scale, need(self.lambda, "lambda")?)
            }
            LawName::NuStar => {
                ReproductionLaw::nu_star(need(self.pi, "pi")?, need(self.eps, "eps")?)
            }
        };
        law.map_err(|e| CliError::from_core_at("law", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerchainParams {
    pub pi: f64,
    pub m: usize,
    pub ell: usize,
    pub ratio: f64,
    pub p_c: f64,
    pub revive: bool,
    pub horizon: usize,
    pub replicas: usize,
    pub seed: u64,
}

impl LowerchainParams {
    pub fn chain(&self) -> Result<LowerChainParams, CliError> {
        LowerChainParams::from_pi(self.m, self.pi, self.ratio, self.p_c, self.ell)
            .map_err(|e| CliError::from_core_at("pi", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneParams {
    pub m: usize,
    pub ell: usize,
    pub p_c: f64,
    pub p_m: f64,
    pub target_pi: f64,
    pub adjust: Adjust,
    pub horizon: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landscape: Option<PathBuf>,
}

impl TuneParams {
    pub fn policy(&self) -> TunerPolicy {
        TunerPolicy {
            target_pi: self.target_pi,
            adjust: self.adjust,
            ..TunerPolicy::default()
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Disordered(DisorderedParams),
    Quasispecies(QuasispeciesParams),
    Sweep(SweepParams),
    DominanceTn(DominanceTnParams),
    DominanceOnestep(DominanceOnestepParams),
    DominanceNstar(DominanceNstarParams),
    Gw(GwParams),
    Lowerchain(LowerchainParams),
    Tune(TuneParams),
}

struct Reader<'a> {
    s: &'a Settings,
}

impl Reader<'_> {
    fn required<T>(&self, field: &str, v: Option<T>) -> Result<T, CliError> {
        v.ok_or_else(|| CliError::config(field, "missing required key"))
    }

    fn seed(&self) -> Result<u64, CliError> {
        self.required("seed", self.s.seed)
    }

    fn m(&self) -> Result<usize, CliError> {
        let m = self.required("m", self.s.m)?;
        if m < 2 || !m.is_multiple_of(2) {
            return Err(CliError::config(
                "m",
                format!("must be an even integer >= 2, got {m}"),
            ));
        }
        Ok(m)
    }

    fn probability(&self, field: &str, v: Option<f64>) -> Result<f64, CliError> {
        let p = self.required(field, v)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(CliError::config(
                field,
                format!("must lie in [0, 1], got {p}"),
            ));
        }
        Ok(p)
    }

    fn p_c(&self) -> Result<f64, CliError> {
        let p = self.probability("p_c", self.s.p_c)?;
        if p >= 1.0 {
            return Err(CliError::config(
                "p_c",
                "must be below 1 so that pi is positive",
            ));
        }
        Ok(p)
    }

    fn positive(&self, field: &str, v: Option<f64>) -> Result<f64, CliError> {
        let x = self.required(field, v)?;
        if !(x > 0.0 && x.is_finite()) {
            return Err(CliError::config(
                field,
                format!("must be positive and finite, got {x}"),
            ));
        }
        Ok(x)
    }

    fn pi(&self) -> Result<f64, CliError> {
        self.positive("pi", self.s.pi)
    }

    fn kappa(&self) -> Result<f64, CliError> {
        let k = self.s.kappa.unwrap_or(2.0);
        if !(k >= 0.0 && k.is_finite()) {
            return Err(CliError::config(
                "kappa",
                format!("must be non-negative, got {k}"),
            ));
        }
        Ok(k)
    }

    fn count(&self, field: &str, v: Option<usize>, default: usize) -> Result<usize, CliError> {
        let n = v.unwrap_or(default);
        if n == 0 {
            return Err(CliError::config(field, "must be at least 1"));
        }
        Ok(n)
    }

    fn replicas(&self) -> Result<usize, CliError> {
        self.count("replicas", self.s.replicas, 100)
    }

    /// `ell`, checked against the landscape document when one is given.
    fn landscape(&self, m: usize) -> Result<(usize, LandscapeSpec), CliError> {
        let spec = read_landscape(&self.s.landscape, self.s.ell.unwrap_or(m))?;
        if let (Some(_), Some(ell)) = (&self.s.landscape, self.s.ell) {
            if ell != spec.ell() {
                return Err(CliError::config(
                    "ell",
                    format!(
                        "{ell} disagrees with the landscape document (ell = {})",
                        spec.ell()
                    ),
                ));
            }
        }
        if spec.ell() < 2 {
            return Err(CliError::config("ell", "must be at least 2"));
        }
        Ok((spec.ell(), spec))
    }
}

/// Checks `pi < 2 (1 - p_c)`, the largest `pi` reachable from a population
/// whose best fitness is twice its mean.
fn check_disordered_pi(pi: f64, p_c: f64) -> Result<(), CliError> {
    let bound = 2.0 * (1.0 - p_c);
    if pi >= bound {
        return Err(CliError::config(
            "pi",
            format!("pi = {pi} violates pi < 2 (1 - p_c) = {bound}"),
        ));
    }
    if pi >= 1.0 {
        return Err(CliError::config(
            "pi",
            format!("the disordered protocol needs pi < 1, got {pi}"),
        ));
    }
    Ok(())
}

fn check_realized_pi(
    pi: f64,
    p_c: f64,
    landscape: &LandscapeSpec,
    m: usize,
) -> Result<(), CliError> {
    let initial = Population::sharp_peak_initial(m, landscape)
        .map_err(|e| CliError::from_core_at("landscape", e))?;
    let s = initial.stats(0.0);
    if s.f_star <= s.f_bar {
        return Err(CliError::config(
            "landscape",
            "the initial population is flat, so pi cannot exceed 1",
        ));
    }
    solve_pm(pi, s.f_star / s.f_bar, p_c, landscape.ell())
        .map_err(|e| CliError::from_core_at("pi", e))?;
    Ok(())
}

impl ExperimentConfig {
    /// Validates `settings` for `experiment`.
    pub fn from_settings(experiment: Experiment, settings: &Settings) -> Result<Self, CliError> {
        let allowed = experiment.keys();
        for key in settings.keys() {
            if !allowed.contains(&key.as_str()) && !COMMON_KEYS.contains(&key.as_str()) {
                return Err(CliError::config(
                    &key,
                    format!("not a parameter of the {} experiment", experiment.name()),
                ));
            }
        }
        let r = Reader { s: settings };
        let seed = r.seed()?;
        let cfg = match experiment {
            Experiment::Disordered => {
                let (pi, m, p_c) = (r.pi()?, r.m()?, r.p_c()?);
                check_disordered_pi(pi, p_c)?;
                ExperimentConfig::Disordered(DisorderedParams {
                    pi,
                    m,
                    p_c,
                    kappa: r.kappa()?,
                    replicas: r.replicas()?,
                    seed,
                })
            }
            Experiment::Quasispecies => {
                let (pi, m, p_c) = (r.pi()?, r.m()?, r.p_c()?);
                if pi <= 1.0 {
                    return Err(CliError::config(
                        "pi",
                        format!("the quasispecies protocol needs pi > 1, got {pi}"),
                    ));
                }
                let (ell, landscape) = r.landscape(m)?;
                check_realized_pi(pi, p_c, &landscape, m)?;
                ExperimentConfig::Quasispecies(QuasispeciesParams {
                    pi,
                    m,
                    ell,
                    p_c,
                    kappa: r.kappa()?,
                    replicas: r.replicas()?,
                    seed,
                    landscape: settings.landscape.clone(),
                })
            }
            Experiment::Sweep => {
                let (m, p_c) = (r.m()?, r.p_c()?);
                let pis = r.required("pis", settings.pis.clone())?;
                if pis.is_empty() {
                    return Err(CliError::config("pis", "needs at least one value"));
                }
                let landscape =
                    LandscapeSpec::sharp_peak(m).map_err(|e| CliError::from_core_at("m", e))?;
                for &pi in &pis {
                    if !(pi > 0.0 && pi.is_finite()) {
                        return Err(CliError::config(
                            "pis",
                            format!("{pi} is not a positive number"),
                        ));
                    }
                    if pi < 1.0 {
                        check_disordered_pi(pi, p_c).map_err(|e| e.rename("pis"))?;
                    } else {
                        check_realized_pi(pi, p_c, &landscape, m).map_err(|e| e.rename("pis"))?;
                    }
                }
                ExperimentConfig::Sweep(SweepParams {
                    m,
                    p_c,
                    pis,
                    kappa: r.kappa()?,
                    replicas: r.replicas()?,
                    seed,
                })
            }
            Experiment::DominanceTn => {
                let (pi, m, p_c) = (r.pi()?, r.m()?, r.p_c()?);
                check_disordered_pi(pi, p_c)?;
                ExperimentConfig::DominanceTn(DominanceTnParams {
                    pi,
                    m,
                    p_c,
                    horizon: settings.horizon.unwrap_or(10),
                    replicas: r.replicas()?,
                    seed,
                })
            }
            Experiment::DominanceNstar => {
                let (pi, m, p_c) = (r.pi()?, r.m()?, r.p_c()?);
                check_disordered_pi(pi, p_c)?;
                let eps = r.positive("eps", settings.eps)?;
                let mean = ReproductionLaw::nu_star(pi, eps)
                    .map_err(|e| CliError::from_core_at("eps", e))?
                    .mean();
                if mean >= 1.0 {
                    return Err(CliError::config(
                        "eps",
                        format!("the dominating law must be subcritical; its mean is {mean}"),
                    ));
                }
                let m_floor = settings.m_floor.unwrap_or(0);
                if m < m_floor {
                    return Err(CliError::config(
                        "m",
                        format!("{m} is below m_floor = {m_floor}"),
                    ));
                }
                ExperimentConfig::DominanceNstar(DominanceNstarParams {
                    pi,
                    m,
                    p_c,
                    eps,
                    horizon: settings.horizon.unwrap_or(10),
                    m_floor,
                    replicas: r.replicas()?,
                    seed,
                })
            }
            Experiment::DominanceOnestep => {
                let (pi, m, p_c) = (r.pi()?, r.m()?, r.p_c()?);
                if pi <= 1.0 {
                    return Err(CliError::config(
                        "pi",
                        format!("the one-step check needs pi > 1, got {pi}"),
                    ));
                }
                let (ell, landscape) = r.landscape(m)?;
                check_realized_pi(pi, p_c, &landscape, m)?;
                ExperimentConfig::DominanceOnestep(DominanceOnestepParams {
                    pi,
                    m,
                    ell,
                    p_c,
                    samples: r.count("samples", settings.samples, 100_000)?,
                    max_generations: r.count("max_generations", settings.max_generations, 50)?,
                    batch: r.count("batch", settings.batch, 5000)?,
                    max_batches: r.count("max_batches", settings.max_batches, 200)?,
                    seed,
                    landscape: settings.landscape.clone(),
                })
            }
            Experiment::Gw => {
                let law = r.required("law", settings.law)?;
                let used: &[&str] = match law {
                    LawName::Poisson => &["lambda"],
                    LawName::ScaledPoisson => &["lambda", "scale"],
                    LawName::NuStar => &["pi", "eps"],
                };
                for key in ["lambda", "scale", "pi", "eps"] {
                    let set = settings.keys().iter().any(|k| k == key);
                    if set && !used.contains(&key) {
                        return Err(CliError::config(
                            key,
                            format!("not a parameter of the {law:?} law"),
                        ));
                    }
                }
                let params = GwParams {
                    law,
                    lambda: settings.lambda,
                    scale: settings.scale,
                    pi: settings.pi,
                    eps: settings.eps,
                    horizon: settings.horizon.unwrap_or(200),
                    replicas: r.replicas()?,
                    seed,
                };
                params.reproduction_law()?;
                ExperimentConfig::Gw(params)
            }
            Experiment::Lowerchain => {
                let (pi, m, p_c) = (r.pi()?, r.m()?, r.p_c()?);
                let ratio = settings.ratio.unwrap_or(2.0);
                if !(ratio > 1.0) {
                    return Err(CliError::config(
                        "ratio",
                        format!("must exceed 1, got {ratio}"),
                    ));
                }
                let params = LowerchainParams {
                    pi,
                    m,
                    ell: settings.ell.unwrap_or(m),
                    ratio,
                    p_c,
                    revive: settings.revive.unwrap_or(false),
                    horizon: settings.horizon.unwrap_or(100),
                    replicas: r.replicas()?,
                    seed,
                };
                params.chain()?;
                ExperimentConfig::Lowerchain(params)
            }
            Experiment::Tune => {
                let m = r.m()?;
                let (ell, _) = r.landscape(m)?;
                let params = TuneParams {
                    m,
                    ell,
                    p_c: r.probability("p_c", settings.p_c)?,
                    p_m: r.probability("p_m", settings.p_m)?,
                    target_pi: settings
                        .target_pi
                        .unwrap_or(TunerPolicy::default().target_pi),
                    adjust: settings.adjust.unwrap_or(Adjust::PM),
                    horizon: settings.horizon.unwrap_or(50),
                    seed,
                    landscape: settings.landscape.clone(),
                };
                params
                    .policy()
                    .validate()
                    .map_err(|e| CliError::from_core_at("target_pi", e))?;
                ExperimentConfig::Tune(params)
            }
        };
        Ok(cfg)
    }

    pub fn experiment(&self) -> Experiment {
        match self {
            ExperimentConfig::Disordered(_) => Experiment::Disordered,
            ExperimentConfig::Quasispecies(_) => Experiment::Quasispecies,
            ExperimentConfig::Sweep(_) => Experiment::Sweep,
            ExperimentConfig::DominanceTn(_) => Experiment::DominanceTn,
            ExperimentConfig::DominanceOnestep(_) => Experiment::DominanceOnestep,
            ExperimentConfig::DominanceNstar(_) => Experiment::DominanceNstar,
            ExperimentConfig::Gw(_) => Experiment::Gw,
            ExperimentConfig::Lowerchain(_) => Experiment::Lowerchain,
            ExperimentConfig::Tune(_) => Experiment::Tune,
        }
    }

    /// Single-line JSON echo, tagged with the experiment name.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }

    /// The parameters as a TOML document that parses back to `self`.
    pub fn to_toml(&self) -> String {
        let mut value = serde_json::to_value(self).unwrap_or(Value::Null);
        if let Value::Object(map) = &mut value {
            map.remove("experiment");
        }
        let settings: Settings = serde_json::from_value(value).unwrap_or_default();
        toml::to_string(&settings).unwrap_or_default()
    }
}

pub(crate) fn read_landscape(
    path: &Option<PathBuf>,
    ell: usize,
) -> Result<LandscapeSpec, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::config("landscape", format!("cannot read {}: {e}", p.display()))
            })?;
            load_landscape(&text).map_err(|e| CliError::from_core_at("landscape", e))
        }
        None => LandscapeSpec::sharp_peak(ell).map_err(|e| CliError::from_core_at("ell", e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> Settings {
        Settings::from_toml("pi = 0.8\nm = 128\np_c = 0.1\nreplicas = 100\nseed = 42\n").unwrap()
    }

    #[test]
    fn overlay_prefers_flags() {
        let flags = Settings {
            m: Some(64),
            threads: Some(8),
            ..Settings::default()
        };
        let merged = minimal().overlay(&flags);
        assert_eq!(merged.m, Some(64));
        assert_eq!(merged.pi, Some(0.8));
        assert_eq!(merged.threads, Some(8));
    }

    #[test]
    fn run_options_stay_out_of_the_echo() {
        let with_threads = minimal().overlay(&Settings {
            threads: Some(8),
            out_dir: Some("x".into()),
            ..Settings::default()
        });
        let a = ExperimentConfig::from_settings(Experiment::Disordered, &minimal()).unwrap();
        let b = ExperimentConfig::from_settings(Experiment::Disordered, &with_threads).unwrap();
        assert_eq!(a.echo(), b.echo());
    }

    #[test]
    fn document_errors_name_the_key() {
        let err = Settings::from_toml("seed = 1\nbogus = 2\n").unwrap_err();
        assert_eq!(err.field(), Some("bogus"));
        let err = Settings::from_toml("m = \"many\"\n").unwrap_err();
        assert_eq!(err.field(), Some("m"));
    }

    #[test]
    fn gw_rejects_keys_of_other_laws() {
        let s =
            Settings::from_toml("law = \"poisson\"\nlambda = 1.5\neps = 0.1\nseed = 1\n").unwrap();
        let err = ExperimentConfig::from_settings(Experiment::Gw, &s).unwrap_err();
        assert_eq!(err.field(), Some("eps"));
    }

    #[test]
    fn adjust_parses_from_both_sources() {
        assert_eq!(parse_adjust("both"), Ok(Adjust::Both));
        let s = Settings::from_toml("adjust = \"p_c\"").unwrap();
        assert_eq!(s.adjust, Some(Adjust::PC));
    }
}
