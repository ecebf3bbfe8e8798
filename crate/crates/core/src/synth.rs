//! Synthetic per-year applicant tables with planted trends.
//!
//! A spec lists the years, the number of applicants per year, and for each
//! attribute a value vocabulary, a missing-cell probability and sampling
//! weights. Weights can drift per year and can be overridden conditionally
//! on the value an earlier attribute took for the same applicant, which is
//! how known trends (a value moving between two primaries, a new
//! connection appearing in a given year) are planted.
//!
//! ```toml
//! version = 1
//! seed = 7
//! years = [2018, 2019, 2020]
//! applicants_per_year = 120
//!
//! [[attributes]]
//! name = "region"
//! values = ["Kanto", "Kansai"]
//!
//! [[attributes]]
//! name = "english"
//! values = ["Entry", "Business"]
//! missing = 0.1
//!
//! [[attributes.given]]
//! attribute = "region"
//! value = "Kansai"
//! years = [2019]
//! weights = [1, 9]
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphstore::Year;
use crate::ingest::{ColumnRule, IngestConfig};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, SynthError> {
    Err(SynthError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub version: u32,
    pub seed: u64,
    pub years: Vec<Year>,
    pub applicants_per_year: usize,
    #[serde(default = "default_id_column")]
    pub id_column: Option<String>,
    /// Applicant property columns; cells are filled with generated text.
    #[serde(default)]
    pub properties: Vec<String>,
    /// Extra columns no rule matches.
    #[serde(default)]
    pub noise_columns: Vec<String>,
    #[serde(default)]
    pub attributes: Vec<AttributeSpec>,
    #[serde(default)]
    pub renames: Vec<RenameSpec>,
}

fn default_id_column() -> Option<String> {
    Some("applicant_id".to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSpec {
    pub name: String,
    pub values: Vec<String>,
    /// Per-cell probability of leaving the cell empty.
    #[serde(default)]
    pub missing: f64,
    /// Base sampling weights (uniform when absent).
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Spread over `name1..nameN` columns when set.
    #[serde(default)]
    pub group_size: Option<usize>,
    #[serde(default)]
    pub drift: Vec<DriftSpec>,
    #[serde(default)]
    pub given: Vec<ConditionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSpec {
    pub year: Year,
    pub weights: Vec<f64>,
}

/// Overrides the weights when an earlier single-column attribute has `value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub attribute: String,
    pub value: String,
    #[serde(default)]
    pub years: Option<Vec<Year>>,
    pub weights: Vec<f64>,
}

/// Writes `column` under the header `source` in `year`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenameSpec {
    pub year: Year,
    pub column: String,
    pub source: String,
}

impl AttributeSpec {
    pub fn columns(&self) -> Vec<String> {
        match self.group_size {
            None => vec![self.name.clone()],
            Some(n) => (1..=n).map(|i| format!("{}{i}", self.name)).collect(),
        }
    }

    fn weights_for(&self, year: Year, earlier: &[(String, Option<String>)]) -> Vec<f64> {
        for cond in &self.given {
            let year_ok = cond.years.as_ref().is_none_or(|ys| ys.contains(&year));
            let value_ok = earlier
                .iter()
                .any(|(n, v)| *n == cond.attribute && v.as_deref() == Some(cond.value.as_str()));
            if year_ok && value_ok {
                return cond.weights.clone();
            }
        }
        if let Some(d) = self.drift.iter().find(|d| d.year == year) {
            return d.weights.clone();
        }
        self.weights
            .clone()
            .unwrap_or_else(|| vec![1.0; self.values.len()])
    }
}

fn check_weights(what: &str, weights: &[f64], n: usize) -> Result<(), SynthError> {
    if weights.len() != n {
        return invalid(format!("{what}: expected {n} weights, found {}", weights.len()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
        return invalid(format!("{what}: weights must be non-negative with a positive sum"));
    }
    Ok(())
}

impl SyntheticSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, SynthError> {
        let spec: SyntheticSpec = toml::from_str(text).map_err(|e| SynthError::Invalid(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, SynthError> {
        let text = std::fs::read_to_string(path).map_err(|source| SynthError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.version != 1 {
            return invalid(format!("unsupported version {}", self.version));
        }
        let mut years = BTreeSet::new();
        for y in &self.years {
            if *y <= 0 || !years.insert(*y) {
                return invalid(format!("year {y} is not a distinct positive integer"));
            }
        }
        let mut columns = BTreeSet::new();
        let mut claim = |c: &str| {
            if c.trim().is_empty() || !columns.insert(c.to_string()) {
                invalid(format!("column name `{c}` is empty or used twice"))
            } else {
                Ok(())
            }
        };
        if let Some(id) = &self.id_column {
            claim(id)?;
        }
        for p in self.properties.iter().chain(&self.noise_columns) {
            claim(p)?;
        }
        let mut single_attrs: Vec<&AttributeSpec> = Vec::new();
        for attr in &self.attributes {
            for c in attr.columns() {
                claim(&c)?;
            }
            if attr.values.is_empty() {
                return invalid(format!("attribute `{}` has an empty vocabulary", attr.name));
            }
            let distinct: BTreeSet<&str> = attr.values.iter().map(|v| v.trim()).collect();
            if distinct.len() != attr.values.len() || distinct.contains("") {
                return invalid(format!("attribute `{}` has blank or duplicate values", attr.name));
            }
            if !(0.0..=1.0).contains(&attr.missing) {
                return invalid(format!("attribute `{}`: missing probability must be in [0, 1]", attr.name));
            }
            if attr.group_size == Some(0) {
                return invalid(format!("attribute `{}`: group_size must be >= 1", attr.name));
            }
            let n = attr.values.len();
            if let Some(w) = &attr.weights {
                check_weights(&attr.name, w, n)?;
            }
            for d in &attr.drift {
                check_weights(&format!("{} drift {}", attr.name, d.year), &d.weights, n)?;
            }
            for c in &attr.given {
                check_weights(&format!("{} given {}={}", attr.name, c.attribute, c.value), &c.weights, n)?;
                let Some(base) = single_attrs.iter().find(|a| a.name == c.attribute) else {
                    return invalid(format!(
                        "attribute `{}` conditions on `{}`, which must be an earlier single-column attribute",
                        attr.name, c.attribute
                    ));
                };
                if !base.values.contains(&c.value) {
                    return invalid(format!("`{}` has no value `{}`", c.attribute, c.value));
                }
            }
            if attr.group_size.is_none() {
                single_attrs.push(attr);
            }
        }
        for r in &self.renames {
            if !columns.contains(&r.column) {
                return invalid(format!("rename of unknown column `{}`", r.column));
            }
            if !years.contains(&r.year) {
                return invalid(format!("rename for year {} outside the dataset", r.year));
            }
        }
        Ok(())
    }

    fn header_for(&self, year: Year) -> Vec<String> {
        let mut header: Vec<String> = self.id_column.iter().cloned().collect();
        header.extend(self.properties.iter().cloned());
        for attr in &self.attributes {
            header.extend(attr.columns());
        }
        header.extend(self.noise_columns.iter().cloned());
        header
            .into_iter()
            .map(|c| {
                self.renames
                    .iter()
                    .find(|r| r.year == year && r.column == c)
                    .map_or(c, |r| r.source.clone())
            })
            .collect()
    }

    /// Generates every year's table as CSV text, in `years` order.
    pub fn generate(&self) -> Result<Vec<(Year, String)>, SynthError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.years.len());
        for &year in &self.years {
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| SynthError::Invalid(e.to_string());
            w.write_record(self.header_for(year)).map_err(csv_err)?;
            for i in 0..self.applicants_per_year {
                let row = self.generate_row(year, i, &mut rng)?;
                w.write_record(&row).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| SynthError::Invalid(e.to_string()))?;
            out.push((year, String::from_utf8(bytes).expect("csv of utf-8 strings is utf-8")));
        }
        Ok(out)
    }

    fn generate_row(&self, year: Year, index: usize, rng: &mut ChaCha8Rng) -> Result<Vec<String>, SynthError> {
        let mut row: Vec<String> = Vec::new();
        if self.id_column.is_some() {
            row.push(format!("{year}-{index:05}"));
        }
        for p in &self.properties {
            row.push(format!("{p} {year}-{index}"));
        }
        let mut chosen: Vec<(String, Option<String>)> = Vec::new();
        for attr in &self.attributes {
            let weights = attr.weights_for(year, &chosen);
            let mut pool: Vec<usize> = (0..attr.values.len()).collect();
            let mut picked = None;
            for _ in attr.columns() {
                let filled = rng.random::<f64>() >= attr.missing;
                let usable: Vec<f64> = pool.iter().map(|&v| weights[v]).collect();
                if !filled || usable.iter().sum::<f64>() <= 0.0 {
                    row.push(String::new());
                    continue;
                }
                let dist = WeightedIndex::new(&usable).map_err(|e| SynthError::Invalid(e.to_string()))?;
                // group members draw without replacement
                let v = pool.remove(dist.sample(rng));
                picked.get_or_insert_with(|| attr.values[v].clone());
                row.push(attr.values[v].clone());
            }
            chosen.push((attr.name.clone(), picked));
        }
        for _ in &self.noise_columns {
            row.push(format!("note {}, ref {}", rng.random_range(0..10_000u32), index));
        }
        Ok(row)
    }

    pub fn file_name(year: Year) -> String {
        format!("fy{year}.csv")
    }

    /// Ingest configuration matching the generated files.
    pub fn ingest_config(&self) -> IngestConfig {
        let mut cfg = IngestConfig {
            id_column: self.id_column.clone(),
            ..Default::default()
        };
        for y in &self.years {
            cfg.year_assignment.insert(PathBuf::from(Self::file_name(*y)), *y);
        }
        for p in &self.properties {
            cfg.column_rules.push(ColumnRule::property(p));
        }
        for attr in &self.attributes {
            cfg.column_rules.push(match attr.group_size {
                None => ColumnRule::attribute(&attr.name),
                Some(_) => {
                    let cols = attr.columns();
                    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
                    ColumnRule::multi_attribute(&attr.name, &refs)
                }
            });
        }
        for r in &self.renames {
            cfg.rename_map.insert((r.year, r.source.clone()), r.column.clone());
        }
        cfg
    }

    /// Writes `fy<year>.csv` per year plus `ingest.toml` into `dir`.
    pub fn write_dataset(&self, dir: &Path) -> Result<GeneratedDataset, SynthError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| SynthError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut files = Vec::new();
        for (year, text) in self.generate()? {
            let path = dir.join(Self::file_name(year));
            std::fs::write(&path, text).map_err(io(&path))?;
            files.push(path);
        }
        let config_path = dir.join("ingest.toml");
        std::fs::write(&config_path, self.ingest_config().to_toml_string()).map_err(io(&config_path))?;
        Ok(GeneratedDataset { files, config_path })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedDataset {
    pub files: Vec<PathBuf>,
    pub config_path: PathBuf,
}
