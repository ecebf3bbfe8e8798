//! Year-to-year transitions and per-year degree series.
//!
//! Attribute nodes present in both views keep their identity. Applicants are
//! carried over when their in-view edge signature (the sorted attribute ids
//! they connect to) is identical in both years; within one signature, old
//! and new ids are paired in ascending order.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphstore::{EdgeRecord, GraphError, PropertyGraph, SubgraphView, Year};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("views differ in {0}")]
    MismatchedViews(String),

    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How applicants of two years are paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Pair applicants with identical edge signatures.
    #[default]
    Signature,
    /// Additionally require the same applicant label (a registration id that
    /// persists across years).
    PersistentId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionDiff {
    pub from_year: Year,
    pub to_year: Year,
    /// `(old applicant id, new applicant id)`, sorted by old id.
    pub kept_applicants: Vec<(String, String)>,
    pub removed_applicants: Vec<String>,
    pub added_applicants: Vec<String>,
    pub removed_edges: Vec<EdgeRecord>,
    pub added_edges: Vec<EdgeRecord>,
    /// Attribute ids present in both views.
    pub retained_attributes: Vec<String>,
}

impl TransitionDiff {
    pub fn is_identity(&self) -> bool {
        self.removed_applicants.is_empty()
            && self.added_applicants.is_empty()
            && self.removed_edges.is_empty()
            && self.added_edges.is_empty()
    }
}

pub fn transition(from: &SubgraphView, to: &SubgraphView) -> Result<TransitionDiff, DynamicsError> {
    transition_with(from, to, MatchMode::Signature)
}

pub fn transition_with(
    from: &SubgraphView,
    to: &SubgraphView,
    mode: MatchMode,
) -> Result<TransitionDiff, DynamicsError> {
    if from.primary_type != to.primary_type || from.secondary_type != to.secondary_type {
        return Err(DynamicsError::MismatchedViews(format!(
            "attribute pair: ({}, {}) vs ({}, {})",
            from.primary_type, from.secondary_type, to.primary_type, to.secondary_type
        )));
    }
    if from.limit != to.limit || from.offset != to.offset {
        return Err(DynamicsError::MismatchedViews("primary slice (limit/offset)".into()));
    }

    let from_attrs = from.attribute_ids();
    let to_attrs = to.attribute_ids();
    let retained_attributes = from_attrs
        .intersection(&to_attrs)
        .map(|s| s.to_string())
        .collect();

    let label_of = |view: &SubgraphView| -> BTreeMap<String, String> {
        view.applicant_nodes
            .iter()
            .map(|a| (a.id.clone(), a.label.clone()))
            .collect()
    };
    let group = |view: &SubgraphView, labels: &BTreeMap<String, String>| {
        let mut groups: BTreeMap<(Vec<String>, Option<String>), Vec<String>> = BTreeMap::new();
        for (id, sig) in view.signatures() {
            let key_label = match mode {
                MatchMode::Signature => None,
                MatchMode::PersistentId => Some(labels[id].clone()),
            };
            let sig = sig.into_iter().map(str::to_string).collect();
            groups.entry((sig, key_label)).or_default().push(id.to_string());
        }
        groups
    };
    let from_groups = group(from, &label_of(from));
    let mut to_groups = group(to, &label_of(to));

    let mut kept_applicants = Vec::new();
    let mut removed: BTreeSet<String> = BTreeSet::new();
    for (key, olds) in from_groups {
        let news = to_groups.remove(&key).unwrap_or_default();
        let paired = olds.len().min(news.len());
        kept_applicants.extend(olds.iter().cloned().zip(news.iter().cloned()).take(paired));
        removed.extend(olds.into_iter().skip(paired));
        to_groups.insert(key, news.into_iter().skip(paired).collect());
    }
    let added: BTreeSet<String> = to_groups.into_values().flatten().collect();
    kept_applicants.sort();

    let removed_edges = from
        .edges
        .iter()
        .filter(|e| removed.contains(&e.applicant_id))
        .cloned()
        .collect();
    let added_edges = to
        .edges
        .iter()
        .filter(|e| added.contains(&e.applicant_id))
        .cloned()
        .collect();

    Ok(TransitionDiff {
        from_year: from.year,
        to_year: to.year,
        kept_applicants,
        removed_applicants: removed.into_iter().collect(),
        added_applicants: added.into_iter().collect(),
        removed_edges,
        added_edges,
        retained_attributes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeSeries {
    pub attribute_id: String,
    /// One point per dataset year, ascending; zero where absent.
    pub points: Vec<(Year, usize)>,
}

impl DegreeSeries {
    pub fn total(&self) -> usize {
        self.points.iter().map(|(_, d)| d).sum()
    }

    pub fn at(&self, year: Year) -> Option<usize> {
        self.points.iter().find(|(y, _)| *y == year).map(|(_, d)| *d)
    }
}

pub fn degree_series(attribute_id: &str, graph: &PropertyGraph) -> Result<DegreeSeries, DynamicsError> {
    match graph.node(attribute_id) {
        Some(n) if n.is_attribute() => {}
        _ => return Err(GraphError::NotFound {
            what: "attribute",
            key: attribute_id.to_string(),
        }
        .into()),
    }
    let mut per_year: BTreeMap<Year, usize> = graph.list_years().into_iter().map(|y| (y, 0)).collect();
    for app in graph.applicants_of(attribute_id) {
        if let Some(year) = graph.node(app).and_then(|n| n.year) {
            *per_year.entry(year).or_default() += 1;
        }
    }
    Ok(DegreeSeries {
        attribute_id: attribute_id.to_string(),
        points: per_year.into_iter().collect(),
    })
}
