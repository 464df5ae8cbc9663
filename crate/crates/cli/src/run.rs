//! Dispatch of a validated config to the core experiments.

use std::path::PathBuf;

use serde_json::{json, Value};

use sgalab_core::branching::{gw_extinction_pgf, gw_simulate, survival_log_fit};
use sgalab_core::experiments::{
    pi_sweep, run_disordered, run_quasispecies, verify_nstar_domination, verify_one_step_dominance,
    verify_tn_domination, DisorderedConfig, OneStepConfig, QuasispeciesConfig, RegimeReport,
    SharpPeakConfig, TailComparison,
};
use sgalab_core::lowerchain::{
    hitting_time_tau_star, matrix_to_text, transition_matrix, MAX_MATRIX_M,
};
use sgalab_core::rng::{replicate, stream};
use sgalab_core::stats::Proportion;
use sgalab_core::tuner::run_adaptive_ga;
use sgalab_core::Population;

use crate::config::{read_landscape, ExperimentConfig, RunOptions};
use crate::output::{
    float, optional, summary_json, text_header, write_file, Table, EVENTS_COLUMNS, ONESTEP_COLUMNS,
    SURVIVAL_COLUMNS, SWEEP_COLUMNS, TAILS_COLUMNS, TAU_STAR_COLUMNS, TELEMETRY_COLUMNS,
    TRAJECTORIES_COLUMNS,
};
use crate::CliError;

/// Files written by a run and a one-line result.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub headline: String,
}

struct Artifacts {
    tables: Vec<Table>,
    /// Extra text files: (file name, schema table, body).
    texts: Vec<(String, &'static str, String)>,
    summary: Value,
    headline: String,
}

impl Artifacts {
    fn new(summary: Value, headline: String) -> Self {
        Artifacts {
            tables: Vec::new(),
            texts: Vec::new(),
            summary,
            headline,
        }
    }
}

/// Runs `config` on a pool of `options.threads` workers and writes its
/// outputs into `options.out_dir`.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<RunOutcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads)
        .build()
        .map_err(|e| {
            CliError::Runtime(format!(
                "cannot start {} worker threads: {e}",
                options.threads
            ))
        })?;
    let artifacts = pool.install(|| compute(config))?;
    let echo = config.echo();
    let config_value = serde_json::to_value(config).unwrap_or(Value::Null);
    let dir = &options.out_dir;
    let mut files = Vec::new();
    for table in &artifacts.tables {
        files.push(write_file(dir, &table.file_name(), &table.render(&echo))?);
    }
    for (name, schema, body) in &artifacts.texts {
        let text = format!("{}{body}", text_header(schema, &echo));
        files.push(write_file(dir, name, &text)?);
    }
    files.push(write_file(
        dir,
        "summary.json",
        &summary_json(&config_value, &artifacts.summary)?,
    )?);
    Ok(RunOutcome {
        files,
        headline: artifacts.headline,
    })
}

fn compute(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    match config {
        ExperimentConfig::Disordered(p) => {
            let report = run_disordered(&DisorderedConfig {
                pi: p.pi,
                m: p.m,
                p_c: p.p_c,
                kappa: p.kappa,
                replicas: p.replicas,
                seed: p.seed,
            })?;
            Ok(regime_artifacts(&report))
        }
        ExperimentConfig::Quasispecies(p) => {
            let landscape = read_landscape(&p.landscape, p.ell)?;
            let report = run_quasispecies(&QuasispeciesConfig {
                pi: p.pi,
                p_c: p.p_c,
                kappa: p.kappa,
                replicas: p.replicas,
                seed: p.seed,
                landscape,
                initial: None,
                m: p.m,
            })?;
            Ok(regime_artifacts(&report))
        }
        ExperimentConfig::Sweep(p) => {
            let rows = pi_sweep(p.m, p.p_c, &p.pis, p.kappa, p.replicas, p.seed)?;
            let mut table = Table::new("sweep", SWEEP_COLUMNS);
            for r in &rows {
                let (d, q) = (&r.disordered, &r.quasispecies);
                table.push(vec![
                    float(r.pi),
                    r.m.to_string(),
                    float(d.estimate),
                    float(d.ci_lo),
                    float(d.ci_hi),
                    float(q.estimate),
                    float(q.ci_lo),
                    float(q.ci_hi),
                ]);
            }
            let mut a = Artifacts::new(
                json!({ "rows": rows }),
                format!("{} sweep rows", rows.len()),
            );
            a.tables.push(table);
            Ok(a)
        }
        ExperimentConfig::DominanceTn(p) => {
            let cfg = SharpPeakConfig {
                m: p.m,
                pi: p.pi,
                p_c: p.p_c,
            };
            let cmp = verify_tn_domination(&cfg, p.horizon, p.replicas, p.seed)?;
            Ok(tail_artifacts(&cmp))
        }
        ExperimentConfig::DominanceNstar(p) => {
            let cfg = SharpPeakConfig {
                m: p.m,
                pi: p.pi,
                p_c: p.p_c,
            };
            let cmp =
                verify_nstar_domination(&cfg, p.eps, p.horizon, p.replicas, p.m_floor, p.seed)?;
            Ok(tail_artifacts(&cmp))
        }
        ExperimentConfig::DominanceOnestep(p) => {
            let landscape = read_landscape(&p.landscape, p.ell)?;
            let initial = Population::sharp_peak_initial(p.m, &landscape)?;
            let report = verify_one_step_dominance(&OneStepConfig {
                landscape,
                initial,
                pi: p.pi,
                p_c: p.p_c,
                samples: p.samples,
                max_generations: p.max_generations,
                batch: p.batch,
                max_batches: p.max_batches,
                seed: p.seed,
            })?;
            let mut table = Table::new("onestep", ONESTEP_COLUMNS);
            for r in &report.rows {
                table.push(vec![
                    r.i.to_string(),
                    r.j.to_string(),
                    float(r.ga_tail),
                    float(r.chain_tail),
                    float(r.tolerance),
                    r.samples.to_string(),
                    r.pass.to_string(),
                ]);
            }
            let violations = report.violations();
            let summary = json!({
                "params": report.params,
                "samples": report.samples,
                "trajectories": report.trajectories,
                "unreachable": report.unreachable(),
                "violations": violations,
            });
            let mut a = Artifacts::new(
                summary,
                format!("{violations} violations in {} rows", report.rows.len()),
            );
            a.tables.push(table);
            Ok(a)
        }
        ExperimentConfig::Gw(p) => {
            let law = p.reproduction_law()?;
            let ends = replicate(p.seed, p.replicas, |_, rng| {
                gw_simulate(&law, p.horizon, rng).extinct_at
            });
            let survival: Vec<f64> = (0..=p.horizon)
                .map(|n| {
                    ends.iter().filter(|e| e.is_none_or(|t| t > n)).count() as f64
                        / p.replicas as f64
                })
                .collect();
            let extinct = ends.iter().filter(|e| e.is_some()).count();
            let frequency = Proportion::wilson(extinct, p.replicas, 0.95);
            let q = gw_extinction_pgf(&law, 1e-13)?;
            let fit = if law.mean() < 1.0 {
                survival_log_fit(&survival, 1)
            } else {
                None
            };
            let mut table = Table::new("survival", SURVIVAL_COLUMNS);
            for (n, s) in survival.iter().enumerate() {
                table.push(vec![n.to_string(), float(*s)]);
            }
            let summary = json!({
                "mean": law.mean(),
                "extinction_pgf": q,
                "extinction_frequency": frequency,
                "survival_fit": fit.map(|f| json!({
                    "slope": f.slope,
                    "intercept": f.intercept,
                    "r_squared": f.r_squared,
                })),
            });
            let headline = format!(
                "extinction frequency {:.4} against fixed point {q:.4}",
                frequency.estimate
            );
            let mut a = Artifacts::new(summary, headline);
            a.tables.push(table);
            Ok(a)
        }
        ExperimentConfig::Lowerchain(p) => {
            let chain = p.chain()?;
            let mut summary = json!({
                "params": chain,
                "target": chain.target(),
                "epsilon": (0..=p.m).map(|i| chain.epsilon(i)).collect::<Vec<_>>(),
            });
            let mut texts = Vec::new();
            if p.m <= MAX_MATRIX_M {
                let matrix = transition_matrix(&chain, p.revive)?;
                texts.push(("matrix.txt".to_string(), "matrix", matrix_to_text(&matrix)));
            }
            let mut tables = Vec::new();
            let mut headline = format!("lower chain with {} states", p.m + 1);
            if p.pi > 1.0 {
                let tau = hitting_time_tau_star(&chain, p.horizon, p.replicas, p.seed)?;
                let mut table = Table::new("tau_star", TAU_STAR_COLUMNS);
                for (n, c) in tau.histogram.iter().enumerate() {
                    table.push(vec![n.to_string(), c.to_string()]);
                }
                tables.push(table);
                headline = format!(
                    "tau* within {} steps in {:.4} of runs",
                    p.horizon, tau.success.estimate
                );
                summary["tau_star"] = json!(tau.success);
            }
            let mut a = Artifacts::new(summary, headline);
            a.tables = tables;
            a.texts = texts;
            Ok(a)
        }
        ExperimentConfig::Tune(p) => {
            let landscape = read_landscape(&p.landscape, p.ell)?;
            let initial = Population::sharp_peak_initial(p.m, &landscape)?;
            let policy = p.policy();
            let mut rng = stream(p.seed);
            let (rows, last) = run_adaptive_ga(
                &landscape,
                &initial,
                (p.p_c, p.p_m),
                &policy,
                p.horizon,
                &mut rng,
            )?;
            let mut table = Table::new("telemetry", TELEMETRY_COLUMNS);
            for r in &rows {
                table.push(vec![
                    r.gen.to_string(),
                    float(r.pi),
                    float(r.p_c),
                    float(r.p_m),
                    float(r.f_star),
                    float(r.f_bar),
                    r.feasible.to_string(),
                ]);
            }
            let feasible = rows.iter().filter(|r| r.feasible).count();
            let s = last.stats(0.0);
            let summary = json!({
                "generations": rows.len(),
                "feasible_generations": feasible,
                "final_f_star": s.f_star,
                "final_f_bar": s.f_bar,
                "final_n_master": s.n_master,
            });
            let headline = format!("{feasible} of {} generations at the target", rows.len());
            let mut a = Artifacts::new(summary, headline);
            a.tables.push(table);
            Ok(a)
        }
    }
}

fn regime_artifacts(report: &RegimeReport) -> Artifacts {
    let mut trajectories = Table::new("trajectories", TRAJECTORIES_COLUMNS);
    let mut events = Table::new("events", EVENTS_COLUMNS);
    for r in &report.replicas {
        for g in &r.series {
            trajectories.push(vec![
                r.replica.to_string(),
                g.gen.to_string(),
                float(g.f_star),
                float(g.f_bar),
                g.n_master.to_string(),
                g.n_descendants.to_string(),
                g.d_max.to_string(),
            ]);
        }
        events.push(vec![
            r.replica.to_string(),
            optional(r.times.tau0),
            optional(r.times.tau1),
            optional(r.times.tau2),
            optional(r.times.tau_bar),
            r.event_disordered.to_string(),
            r.event_quasispecies.to_string(),
        ]);
    }
    let f = &report.frequency;
    let headline = format!(
        "{:?} event in {}/{} replicas ({:.4}, 95% CI {:.4}..{:.4})",
        report.protocol, f.successes, f.trials, f.estimate, f.ci_lo, f.ci_hi
    );
    let summary = serde_json::to_value(report).unwrap_or(Value::Null);
    let mut a = Artifacts::new(summary, headline);
    a.tables.push(trajectories);
    a.tables.push(events);
    a
}

fn tail_artifacts(cmp: &TailComparison) -> Artifacts {
    let mut table = Table::new("tails", TAILS_COLUMNS);
    for r in &cmp.rows {
        table.push(vec![
            r.n.to_string(),
            r.k.to_string(),
            float(r.dominated),
            float(r.dominating),
            float(r.tol_dominated),
            float(r.tol_dominating),
            r.pass.to_string(),
        ]);
    }
    let violations = cmp.violations();
    let summary =
        json!({ "rows": cmp.rows.len(), "violations": violations, "passed": cmp.passed() });
    let mut a = Artifacts::new(
        summary,
        format!("{violations} violations in {} tail rows", cmp.rows.len()),
    );
    a.tables.push(table);
    a
}
