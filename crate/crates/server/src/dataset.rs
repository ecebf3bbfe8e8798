use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;
use yeargraph_core::graphstore::{import_pg, ExchangeError};
use yeargraph_core::ingest::{ingest_files, IngestError};
use yeargraph_core::{IngestConfig, PropertyGraph};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset directory {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("dataset `{id}`: {source}")]
    Exchange { id: String, source: ExchangeError },

    #[error("dataset `{id}`: {source}")]
    Ingest { id: String, source: IngestError },

    #[error("duplicate dataset id `{0}`")]
    Duplicate(String),
}

/// An ingested graph. Immutable once registered.
#[derive(Debug)]
pub struct Dataset {
    pub id: String,
    pub graph: PropertyGraph,
}

/// Datasets by id, ascending.
#[derive(Debug, Default, Clone)]
pub struct Registry {
    datasets: BTreeMap<String, Arc<Dataset>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, graph: PropertyGraph) -> Result<(), DatasetError> {
        let id = id.into();
        if self.datasets.contains_key(&id) {
            return Err(DatasetError::Duplicate(id));
        }
        self.datasets.insert(id.clone(), Arc::new(Dataset { id, graph }));
        Ok(())
    }

    pub fn with(mut self, id: impl Into<String>, graph: PropertyGraph) -> Self {
        let id = id.into();
        self.datasets.insert(id.clone(), Arc::new(Dataset { id, graph }));
        self
    }

    pub fn get(&self, id: &str) -> Option<&Arc<Dataset>> {
        self.datasets.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Dataset>> {
        self.datasets.values()
    }

    pub fn len(&self) -> usize {
        self.datasets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.datasets.is_empty()
    }

    /// Loads every dataset found directly under `dir`:
    ///
    /// - `<id>.nodes.tsv` + `<id>.edges.tsv` exchange pairs;
    /// - subdirectories `<id>/` holding an `ingest.toml`, whose `[files]` are ingested.
    pub fn load_dir(dir: &Path) -> Result<Self, DatasetError> {
        let io = |source| DatasetError::Io {
            path: dir.to_path_buf(),
            source,
        };
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(io)?;
        entries.sort();
        let mut registry = Registry::new();
        for path in entries {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
            if path.is_dir() {
                let config = path.join("ingest.toml");
                if config.is_file() {
                    registry.insert(name.clone(), ingest_dataset(&name, &config)?)?;
                }
            } else if let Some(id) = name.strip_suffix(".nodes.tsv") {
                let graph = import_pg(&path.with_file_name(id)).map_err(|source| DatasetError::Exchange {
                    id: id.to_string(),
                    source,
                })?;
                registry.insert(id, graph)?;
            }
        }
        Ok(registry)
    }
}

/// Ingests the files listed in an ingest config.
pub fn ingest_dataset(id: &str, config_path: &Path) -> Result<PropertyGraph, DatasetError> {
    let err = |source| DatasetError::Ingest {
        id: id.to_string(),
        source,
    };
    let config = IngestConfig::load(config_path).map_err(err)?;
    let files: Vec<PathBuf> = config.year_assignment.keys().cloned().collect();
    let (graph, report) = ingest_files(&files, &config).map_err(err)?;
    for w in &report.warnings {
        tracing::warn!(dataset = id, "{w}");
    }
    Ok(graph)
}
