//! Per-year CSV tables to one property graph.
//!
//! Every column is classified as a single-column attribute, an applicant
//! property, or a member of a multi-column attribute group. Each row becomes
//! an applicant node; each non-empty attribute cell becomes an edge to the
//! attribute node keyed by `(type, trimmed value)`, shared across rows and
//! years.

mod config;

pub use config::{ColumnKind, ColumnRule, IngestConfig, CONFIG_VERSION};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;
use tracing::warn;

use crate::graphstore::{EdgeRecord, GraphError, NodeRecord, PropertyGraph, Year};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("no input files")]
    NoInputs,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: row {row} (line {line}): expected {expected} cells, found {found}")]
    RowShape {
        path: PathBuf,
        row: usize,
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("{path}: duplicate column `{column}` in header")]
    DuplicateColumn { path: PathBuf, column: String },

    #[error("{path}: row {row}: duplicate applicant id `{id}` in year {year}")]
    DuplicateId {
        path: PathBuf,
        row: usize,
        year: Year,
        id: String,
    },

    #[error("{path}: no fiscal year assigned to this file")]
    NoYear { path: PathBuf },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("configuration error: column `{column}` matched by both {first} and {second}")]
    ConflictingRules {
        column: String,
        first: String,
        second: String,
    },

    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl IngestError {
    /// Row index for errors tied to a single data row.
    pub fn row(&self) -> Option<usize> {
        match self {
            IngestError::RowShape { row, .. } | IngestError::DuplicateId { row, .. } => Some(*row),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestWarning {
    EmptyId { path: PathBuf, year: Year, row: usize },
    MissingIdColumn { path: PathBuf, column: String },
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestWarning::EmptyId { path, year, row } => write!(
                f,
                "{}: row {row}: empty id cell, using row index for year {year}",
                path.display()
            ),
            IngestWarning::MissingIdColumn { path, column } => write!(
                f,
                "{}: id column `{column}` not in header, using row indices",
                path.display()
            ),
        }
    }
}

/// One parsed CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSnapshot {
    pub year: Year,
    /// Column names after renaming.
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub source: PathBuf,
}

impl TableSnapshot {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnClass {
    Attribute(String),
    Property(String),
    MultiAttribute(String),
    Ignored,
}

impl ColumnClass {
    /// Attribute type for attribute-producing columns.
    pub fn attribute_type(&self) -> Option<&str> {
        match self {
            ColumnClass::Attribute(t) | ColumnClass::MultiAttribute(t) => Some(t),
            _ => None,
        }
    }
}

/// Per-column class, aligned with a snapshot header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub columns: Vec<(String, ColumnClass)>,
}

impl Classification {
    pub fn class_of(&self, column: &str) -> Option<&ColumnClass> {
        self.columns.iter().find(|(c, _)| c == column).map(|(_, k)| k)
    }
}

/// Whitespace-only cells count as empty.
pub fn normalize_value(cell: &str) -> Option<&str> {
    let v = cell.trim();
    (!v.is_empty()).then_some(v)
}

pub fn parse_table(path: &Path, year: Year, config: &IngestConfig) -> Result<TableSnapshot, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_reader(file, path, year, config)
}

/// Parses CSV text from any reader; `path` is only used for reporting.
pub fn parse_reader<R: std::io::Read>(
    reader: R,
    path: &Path,
    year: Year,
    config: &IngestConfig,
) -> Result<TableSnapshot, IngestError> {
    let csv_err = |source| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let tidy = |s: &str| -> String {
        if config.trim_whitespace {
            s.trim().to_string()
        } else {
            s.to_string()
        }
    };

    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| {
            let h = h.trim();
            config
                .rename_map
                .get(&(year, h.to_string()))
                .cloned()
                .unwrap_or_else(|| h.to_string())
        })
        .collect();
    let mut seen = BTreeSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(IngestError::DuplicateColumn {
                path: path.to_path_buf(),
                column: h.clone(),
            });
        }
    }

    let mut rows = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() != header.len() {
            return Err(IngestError::RowShape {
                path: path.to_path_buf(),
                row,
                line: record.position().map_or(0, |p| p.line()),
                expected: header.len(),
                found: record.len(),
            });
        }
        rows.push(record.iter().map(tidy).collect());
    }
    Ok(TableSnapshot {
        year,
        header,
        rows,
        source: path.to_path_buf(),
    })
}

pub fn classify_columns(snapshot: &TableSnapshot, config: &IngestConfig) -> Result<Classification, IngestError> {
    let mut columns = Vec::with_capacity(snapshot.header.len());
    for column in &snapshot.header {
        let mut hits = config
            .column_rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.sources.iter().any(|s| s == column));
        let class = match (hits.next(), hits.next()) {
            (None, _) => ColumnClass::Ignored,
            (Some((i, _)), Some((j, _))) => {
                return Err(IngestError::ConflictingRules {
                    column: column.clone(),
                    first: config.rule_description(i),
                    second: config.rule_description(j),
                })
            }
            (Some((_, rule)), None) => {
                let name = rule.canonical_name.clone();
                match rule.kind {
                    ColumnKind::Attribute => ColumnClass::Attribute(name),
                    ColumnKind::Property => ColumnClass::Property(name),
                    ColumnKind::MultiAttribute => ColumnClass::MultiAttribute(name),
                }
            }
        };
        columns.push((column.clone(), class));
    }
    Ok(Classification { columns })
}

/// Summary of a graph build.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows: usize,
    pub warnings: Vec<IngestWarning>,
}

pub fn build_graph(snapshots: &[TableSnapshot], config: &IngestConfig) -> Result<PropertyGraph, IngestError> {
    build_graph_with_report(snapshots, config).map(|(g, _)| g)
}

/// Builds the graph and reports row counts and warnings.
///
/// Snapshots are processed by ascending year, then in the given order. When
/// no id column is configured, applicants are keyed by their 0-based row
/// index within the year, counted across all files of that year.
pub fn build_graph_with_report(
    snapshots: &[TableSnapshot],
    config: &IngestConfig,
) -> Result<(PropertyGraph, IngestReport), IngestError> {
    let classified = snapshots
        .iter()
        .map(|s| classify_columns(s, config).map(|c| (s, c)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut ordered: Vec<_> = classified.iter().collect();
    ordered.sort_by_key(|(s, _)| s.year);

    let mut graph = PropertyGraph::new();
    let mut report = IngestReport::default();
    let mut year_rows: BTreeMap<Year, usize> = BTreeMap::new();

    for (snapshot, classes) in ordered {
        let year = snapshot.year;
        let id_index = match &config.id_column {
            Some(col) => {
                let idx = snapshot.column_index(col);
                if idx.is_none() {
                    let w = IngestWarning::MissingIdColumn {
                        path: snapshot.source.clone(),
                        column: col.clone(),
                    };
                    warn!("{w}");
                    report.warnings.push(w);
                }
                idx
            }
            None => None,
        };
        let next_row = year_rows.entry(year).or_insert(0);

        for (file_row, cells) in snapshot.rows.iter().enumerate() {
            let row_key = next_row.to_string();
            *next_row += 1;
            report.rows += 1;

            let key = match id_index {
                Some(i) => match normalize_value(&cells[i]) {
                    Some(v) => v.to_string(),
                    None => {
                        let w = IngestWarning::EmptyId {
                            path: snapshot.source.clone(),
                            year,
                            row: file_row,
                        };
                        warn!("{w}");
                        report.warnings.push(w);
                        row_key
                    }
                },
                None => row_key,
            };

            let mut applicant = NodeRecord::applicant(year, &key);
            if graph.node(&applicant.id).is_some() {
                return Err(IngestError::DuplicateId {
                    path: snapshot.source.clone(),
                    row: file_row,
                    year,
                    id: key,
                });
            }
            for ((_, class), cell) in classes.columns.iter().zip(cells) {
                if let ColumnClass::Property(name) = class {
                    if normalize_value(cell).is_some() {
                        applicant.props.insert(name.clone(), cell.clone());
                    }
                }
            }
            let applicant_id = applicant.id.clone();
            graph.insert_node(applicant)?;

            for ((_, class), cell) in classes.columns.iter().zip(cells) {
                let (Some(attr_type), Some(value)) = (class.attribute_type(), normalize_value(cell)) else {
                    continue;
                };
                let node = NodeRecord::attribute(attr_type, value);
                let attr_id = node.id.clone();
                graph.insert_node(node)?;
                graph.insert_edge(EdgeRecord::new(applicant_id.clone(), attr_id))?;
            }
        }
    }
    Ok((graph, report))
}

/// Parses every input (year from `config.year_assignment`) and builds the graph.
pub fn ingest_files(
    paths: &[PathBuf],
    config: &IngestConfig,
) -> Result<(PropertyGraph, IngestReport), IngestError> {
    if paths.is_empty() {
        return Err(IngestError::NoInputs);
    }
    let snapshots = paths
        .iter()
        .map(|p| {
            let year = config
                .year_for(p)
                .ok_or_else(|| IngestError::NoYear { path: p.clone() })?;
            parse_table(p, year, config)
        })
        .collect::<Result<Vec<_>, _>>()?;
    build_graph_with_report(&snapshots, config)
}
