//! Declarative ingest configuration, stored as TOML:
//!
//! ```toml
//! version = 1
//! id_column = "applicant_id"
//! trim_whitespace = true
//!
//! [files]
//! "fy2019.csv" = 2019
//!
//! [[columns]]
//! kind = "attribute"
//! name = "english"
//!
//! [[columns]]
//! kind = "multi_attribute"
//! name = "internship history"
//! match = ["internship history1", "internship history2", "internship history3"]
//!
//! [[renames]]
//! year = 2019
//! from = "english_level"
//! to = "english"
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::graphstore::Year;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Attribute,
    Property,
    MultiAttribute,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnRule {
    pub kind: ColumnKind,
    /// Attribute type (attribute kinds) or property key.
    #[serde(rename = "name")]
    pub canonical_name: String,
    /// Source column names. Defaults to `[canonical_name]` for single-column kinds.
    #[serde(rename = "match", default, skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<String>,
}

impl ColumnRule {
    pub fn attribute(name: &str) -> Self {
        Self::single(ColumnKind::Attribute, name)
    }

    pub fn property(name: &str) -> Self {
        Self::single(ColumnKind::Property, name)
    }

    pub fn multi_attribute(name: &str, sources: &[&str]) -> Self {
        ColumnRule {
            kind: ColumnKind::MultiAttribute,
            canonical_name: name.to_string(),
            sources: sources.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn single(kind: ColumnKind, name: &str) -> Self {
        ColumnRule {
            kind,
            canonical_name: name.to_string(),
            sources: vec![name.to_string()],
        }
    }

    fn describe(&self) -> String {
        format!("{:?} rule `{}`", self.kind, self.canonical_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestConfig {
    pub id_column: Option<String>,
    pub year_assignment: BTreeMap<PathBuf, Year>,
    pub column_rules: Vec<ColumnRule>,
    /// `(year, old header name)` to canonical header name.
    pub rename_map: BTreeMap<(Year, String), String>,
    pub trim_whitespace: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            id_column: None,
            year_assignment: BTreeMap::new(),
            column_rules: Vec::new(),
            rename_map: BTreeMap::new(),
            trim_whitespace: true,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id_column: Option<String>,
    #[serde(default = "default_true")]
    trim_whitespace: bool,
    #[serde(default)]
    files: BTreeMap<String, Year>,
    #[serde(default)]
    columns: Vec<ColumnRule>,
    #[serde(default)]
    renames: Vec<RenameEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RenameEntry {
    year: Year,
    from: String,
    to: String,
}

fn default_true() -> bool {
    true
}

impl IngestConfig {
    /// Parses a config document. Relative paths under `[files]` are resolved
    /// against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self, IngestError> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| IngestError::Config(e.to_string()))?;
        if file.version != CONFIG_VERSION {
            return Err(IngestError::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                file.version
            )));
        }
        let year_assignment = file
            .files
            .into_iter()
            .map(|(p, y)| {
                let p = PathBuf::from(p);
                let p = match base_dir {
                    Some(base) if p.is_relative() => base.join(p),
                    _ => p,
                };
                (p, y)
            })
            .collect();
        let mut rename_map = BTreeMap::new();
        for r in file.renames {
            if rename_map.insert((r.year, r.from.clone()), r.to).is_some() {
                return Err(IngestError::Config(format!(
                    "column `{}` renamed twice for year {}",
                    r.from, r.year
                )));
            }
        }
        let column_rules = file
            .columns
            .into_iter()
            .map(|mut rule| {
                if rule.sources.is_empty() && rule.kind != ColumnKind::MultiAttribute {
                    rule.sources.push(rule.canonical_name.clone());
                }
                rule
            })
            .collect();
        let config = IngestConfig {
            id_column: file.id_column,
            year_assignment,
            column_rules,
            rename_map,
            trim_whitespace: file.trim_whitespace,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path.parent())
    }

    /// Renders the config as a TOML document that [`IngestConfig::from_toml_str`] accepts.
    pub fn to_toml_string(&self) -> String {
        let file = ConfigFile {
            version: CONFIG_VERSION,
            id_column: self.id_column.clone(),
            trim_whitespace: self.trim_whitespace,
            files: self
                .year_assignment
                .iter()
                .map(|(p, y)| (p.to_string_lossy().into_owned(), *y))
                .collect(),
            columns: self.column_rules.clone(),
            renames: self
                .rename_map
                .iter()
                .map(|((year, from), to)| RenameEntry {
                    year: *year,
                    from: from.clone(),
                    to: to.clone(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let mut names = BTreeSet::new();
        for rule in &self.column_rules {
            if rule.canonical_name.trim().is_empty() {
                return Err(IngestError::Config("column rule with empty name".into()));
            }
            if !names.insert(rule.canonical_name.as_str()) {
                return Err(IngestError::Config(format!(
                    "canonical name `{}` used by more than one rule",
                    rule.canonical_name
                )));
            }
            match rule.kind {
                ColumnKind::MultiAttribute if rule.sources.is_empty() => {
                    return Err(IngestError::Config(format!(
                        "{} needs at least one source column",
                        rule.describe()
                    )))
                }
                ColumnKind::Attribute | ColumnKind::Property if rule.sources.len() != 1 => {
                    return Err(IngestError::Config(format!(
                        "{} needs exactly one source column",
                        rule.describe()
                    )))
                }
                _ => {}
            }
        }
        let mut owner: BTreeMap<&str, &ColumnRule> = BTreeMap::new();
        for rule in &self.column_rules {
            for src in &rule.sources {
                if let Some(first) = owner.insert(src, rule) {
                    return Err(IngestError::ConflictingRules {
                        column: src.clone(),
                        first: first.describe(),
                        second: rule.describe(),
                    });
                }
            }
        }
        if let Some((path, year)) = self.year_assignment.iter().find(|(_, y)| **y <= 0) {
            return Err(IngestError::Config(format!(
                "year {year} for `{}` is not a positive integer",
                path.display()
            )));
        }
        Ok(())
    }

    pub(crate) fn rule_description(&self, index: usize) -> String {
        self.column_rules[index].describe()
    }

    /// Fiscal year assigned to an input file. Matches the configured path
    /// exactly, then by canonical path, then by bare file name.
    pub fn year_for(&self, path: &Path) -> Option<Year> {
        if let Some(y) = self.year_assignment.get(path) {
            return Some(*y);
        }
        if let Ok(canon) = path.canonicalize() {
            let hit = self
                .year_assignment
                .iter()
                .find(|(p, _)| p.canonicalize().is_ok_and(|c| c == canon));
            if let Some((_, y)) = hit {
                return Some(*y);
            }
        }
        let name = path.file_name()?;
        let mut by_name = self
            .year_assignment
            .iter()
            .filter(|(p, _)| p.file_name() == Some(name));
        match (by_name.next(), by_name.next()) {
            (Some((_, y)), None) => Some(*y),
            _ => None,
        }
    }
}
