//! Output files.
//!
//! Every CSV starts with two comment lines, the schema tag and the config
//! echo, followed by the header row. Floats are written with 17 significant
//! digits, missing values as empty fields and booleans as `true`/`false`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const TRAJECTORIES_COLUMNS: &[&str] = &[
    "replica",
    "gen",
    "f_star",
    "f_bar",
    "n_master",
    "n_descendants",
    "d_max",
];
pub const EVENTS_COLUMNS: &[&str] = &[
    "replica",
    "tau0",
    "tau1",
    "tau2",
    "tau_bar",
    "event_disordered",
    "event_quasispecies",
];
pub const SWEEP_COLUMNS: &[&str] = &[
    "pi",
    "m",
    "freq_disordered",
    "ci_lo",
    "ci_hi",
    "freq_quasispecies",
    "qci_lo",
    "qci_hi",
];
pub const TELEMETRY_COLUMNS: &[&str] = &["gen", "pi", "p_c", "p_m", "f_star", "f_bar", "feasible"];
pub const TAILS_COLUMNS: &[&str] = &[
    "n",
    "k",
    "dominated",
    "dominating",
    "tol_dominated",
    "tol_dominating",
    "pass",
];
pub const ONESTEP_COLUMNS: &[&str] = &[
    "i",
    "j",
    "ga_tail",
    "chain_tail",
    "tolerance",
    "samples",
    "pass",
];
pub const SURVIVAL_COLUMNS: &[&str] = &["n", "survival"];
pub const TAU_STAR_COLUMNS: &[&str] = &["n", "count"];

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn optional(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Schema tag of a table, e.g. `sgalab/events/1`.
pub fn schema_tag(table: &str) -> String {
    format!("sgalab/{table}/{SCHEMA_VERSION}")
}

/// A CSV table held in memory until written.
#[derive(Debug, Clone)]
pub struct Table {
    name: &'static str,
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &'static [&'static str]) -> Self {
        Table {
            name,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn render(&self, echo: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema: {}", schema_tag(self.name));
        let _ = writeln!(out, "# config: {echo}");
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Header lines for a non-CSV text file.
pub fn text_header(table: &str, echo: &str) -> String {
    format!("# schema: {}\n# config: {echo}\n", schema_tag(table))
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    schema: String,
    config: &'a serde_json::Value,
    result: &'a T,
}

pub fn summary_json<T: Serialize>(
    config: &serde_json::Value,
    result: &T,
) -> Result<String, CliError> {
    let s = Summary {
        schema: schema_tag("summary"),
        config,
        result,
    };
    serde_json::to_string_pretty(&s)
        .map(|mut text| {
            text.push('\n');
            text
        })
        .map_err(|e| CliError::Runtime(format!("cannot serialize summary: {e}")))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(float(2.0), "2.0000000000000000e0");
        let back: f64 = float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new("events", EVENTS_COLUMNS);
        t.push(vec![
            "0".into(),
            "3".into(),
            "".into(),
            "".into(),
            "".into(),
            "true".into(),
            "false".into(),
        ]);
        let text = t.render("{\"seed\":1}");
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# schema: sgalab/events/1");
        assert_eq!(lines[1], "# config: {\"seed\":1}");
        assert_eq!(
            lines[2],
            "replica,tau0,tau1,tau2,tau_bar,event_disordered,event_quasispecies"
        );
        assert_eq!(lines[3], "0,3,,,,true,false");
    }
}
