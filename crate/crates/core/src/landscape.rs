//! Fitness landscapes on `{0,1}^ell`.
//!
//! All landscapes map into `]0, +inf[`; constructors reject anything else.
//!
//! Landscape documents are TOML:
//!
//! ```toml
//! kind = "table"          # "sharp_peak" | "one_max_shifted" | "table"
//! ell = 3
//! default = 1.0           # table only: fitness of unlisted genotypes
//!
//! [[entries]]
//! genotype = "111"
//! fitness = 2.0
//! ```
//!
//! A table without `default` must list all `2^ell` genotypes.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Largest chromosome length accepted for explicit tables.
pub const MAX_TABLE_ELL: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum LandscapeSpec {
    /// 2 on the all-ones Master sequence, 1 elsewhere.
    SharpPeak { ell: usize },
    /// `1 + number of ones`.
    OneMaxShifted { ell: usize },
    /// Explicit values indexed by [`BitString::to_index`].
    Table { ell: usize, values: Vec<f64> },
}

impl LandscapeSpec {
    pub fn sharp_peak(ell: usize) -> Result<Self> {
        if ell < 2 {
            return Err(Error::config("ell", "sharp peak needs ell >= 2"));
        }
        Ok(LandscapeSpec::SharpPeak { ell })
    }

    pub fn one_max_shifted(ell: usize) -> Result<Self> {
        if ell == 0 {
            return Err(Error::config("ell", "ell must be positive"));
        }
        Ok(LandscapeSpec::OneMaxShifted { ell })
    }

    pub fn table(ell: usize, values: Vec<f64>) -> Result<Self> {
        if ell == 0 || ell > MAX_TABLE_ELL {
            return Err(Error::Capability(format!(
                "table landscapes support 1 <= ell <= {MAX_TABLE_ELL}, got {ell}"
            )));
        }
        if values.len() != 1usize << ell {
            return Err(Error::InvalidLandscape(format!(
                "table for ell = {ell} needs {} values, got {}",
                1usize << ell,
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidLandscape(format!(
                "fitness of {} is {v}, must be finite and > 0",
                BitString::from_index(i as u64, ell)
            )));
        }
        Ok(LandscapeSpec::Table { ell, values })
    }

    pub fn ell(&self) -> usize {
        match self {
            LandscapeSpec::SharpPeak { ell }
            | LandscapeSpec::OneMaxShifted { ell }
            | LandscapeSpec::Table { ell, .. } => *ell,
        }
    }

    pub fn fitness(&self, x: &BitString) -> f64 {
        debug_assert_eq!(x.len(), self.ell());
        match self {
            LandscapeSpec::SharpPeak { .. } => {
                if x.is_all_ones() {
                    2.0
                } else {
                    1.0
                }
            }
            LandscapeSpec::OneMaxShifted { .. } => 1.0 + x.count_ones() as f64,
            LandscapeSpec::Table { values, .. } => values[x.to_index() as usize],
        }
    }

    /// Parses a landscape document (see the module docs).
    pub fn from_toml(source: &str) -> Result<Self> {
        let doc: LandscapeDocument =
            toml::from_str(source).map_err(|e| Error::Parse(e.to_string()))?;
        doc.into_spec()
    }

    pub fn to_document(&self) -> LandscapeDocument {
        match self {
            LandscapeSpec::SharpPeak { ell } => LandscapeDocument {
                kind: LandscapeKind::SharpPeak,
                ell: *ell,
                default: None,
                entries: Vec::new(),
            },
            LandscapeSpec::OneMaxShifted { ell } => LandscapeDocument {
                kind: LandscapeKind::OneMaxShifted,
                ell: *ell,
                default: None,
                entries: Vec::new(),
            },
            LandscapeSpec::Table { ell, values } => LandscapeDocument {
                kind: LandscapeKind::Table,
                ell: *ell,
                default: None,
                entries: values
                    .iter()
                    .enumerate()
                    .map(|(i, &fitness)| TableEntry {
                        genotype: BitString::from_index(i as u64, *ell).to_string(),
                        fitness,
                    })
                    .collect(),
            },
        }
    }
}

/// Loads a landscape from its document text.
pub fn load_landscape(source: &str) -> Result<LandscapeSpec> {
    LandscapeSpec::from_toml(source)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandscapeKind {
    SharpPeak,
    OneMaxShifted,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub genotype: String,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeDocument {
    pub kind: LandscapeKind,
    pub ell: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<TableEntry>,
}

impl LandscapeDocument {
    pub fn into_spec(self) -> Result<LandscapeSpec> {
        match self.kind {
            LandscapeKind::SharpPeak | LandscapeKind::OneMaxShifted => {
                if !self.entries.is_empty() || self.default.is_some() {
                    return Err(Error::Parse(
                        "entries/default are only valid for kind = \"table\"".into(),
                    ));
                }
                if self.kind == LandscapeKind::SharpPeak {
                    LandscapeSpec::sharp_peak(self.ell)
                } else {
                    LandscapeSpec::one_max_shifted(self.ell)
                }
            }
            LandscapeKind::Table => {
                if self.ell == 0 || self.ell > MAX_TABLE_ELL {
                    return Err(Error::Capability(format!(
                        "table landscapes support 1 <= ell <= {MAX_TABLE_ELL}, got {}",
                        self.ell
                    )));
                }
                let size = 1usize << self.ell;
                let mut values: Vec<Option<f64>> = vec![self.default; size];
                for entry in &self.entries {
                    let g: BitString = entry.genotype.parse()?;
                    if g.len() != self.ell {
                        return Err(Error::Parse(format!(
                            "genotype {:?} has length {}, expected {}",
                            entry.genotype,
                            g.len(),
                            self.ell
                        )));
                    }
                    values[g.to_index() as usize] = Some(entry.fitness);
                }
                let values = values
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.ok_or_else(|| {
                            Error::Parse(format!(
                                "genotype {} has no fitness and no default is given",
                                BitString::from_index(i as u64, self.ell)
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                LandscapeSpec::table(self.ell, values)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharp_peak_values() {
        let f = LandscapeSpec::sharp_peak(4).unwrap();
        assert_eq!(f.fitness(&BitString::ones(4)), 2.0);
        assert_eq!(f.fitness(&BitString::zeros(4)), 1.0);
        // exhaustive over the 16 genotypes
        for i in 0..16u64 {
            let x = BitString::from_index(i, 4);
            let expected = if i == 15 { 2.0 } else { 1.0 };
            assert_eq!(f.fitness(&x), expected, "genotype {x}");
        }
        assert!(LandscapeSpec::sharp_peak(1).is_err());
    }

    #[test]
    fn one_max_shifted_is_positive() {
        let f = LandscapeSpec::one_max_shifted(5).unwrap();
        assert_eq!(f.fitness(&BitString::zeros(5)), 1.0);
        assert_eq!(f.fitness(&"10110".parse().unwrap()), 4.0);
    }

    #[test]
    fn document_for_sharp_peak() {
        let doc = "kind = \"sharp_peak\"\nell = 8\n";
        assert_eq!(
            load_landscape(doc).unwrap(),
            LandscapeSpec::sharp_peak(8).unwrap()
        );
    }

    #[test]
    fn table_document_round_trip() {
        let mut doc = String::from("kind = \"table\"\nell = 3\n");
        let values: Vec<f64> = (0..8).map(|i| 0.5 + i as f64 * 0.25).collect();
        for (i, v) in values.iter().enumerate() {
            doc.push_str(&format!(
                "[[entries]]\ngenotype = \"{}\"\nfitness = {v}\n",
                BitString::from_index(i as u64, 3)
            ));
        }
        let f = load_landscape(&doc).unwrap();
        for (i, v) in values.iter().enumerate() {
            assert_eq!(f.fitness(&BitString::from_index(i as u64, 3)), *v);
        }
        let again = toml::to_string(&f.to_document()).unwrap();
        assert_eq!(load_landscape(&again).unwrap(), f);
    }

    #[test]
    fn zero_fitness_is_rejected() {
        let doc = "kind = \"table\"\nell = 1\n[[entries]]\ngenotype = \"0\"\nfitness = 0.0\n[[entries]]\ngenotype = \"1\"\nfitness = 1.0\n";
        assert!(matches!(
            load_landscape(doc),
            Err(Error::InvalidLandscape(_))
        ));
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(load_landscape("kind = "), Err(Error::Parse(_))));
        assert!(matches!(
            load_landscape("kind = \"table\"\nell = 2\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            load_landscape("kind = \"sharp_peak\"\nell = 4\nbogus = 1\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            load_landscape("kind = \"table\"\nell = 30\ndefault = 1.0\n"),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn default_fills_unlisted() {
        let doc = "kind = \"table\"\nell = 2\ndefault = 0.5\n[[entries]]\ngenotype = \"11\"\nfitness = 3.0\n";
        let f = load_landscape(doc).unwrap();
        assert_eq!(f.fitness(&"11".parse().unwrap()), 3.0);
        assert_eq!(f.fitness(&"01".parse().unwrap()), 0.5);
    }
}
