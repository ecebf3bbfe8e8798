//! In-memory multi-partite property graph.
//!
//! Nodes are either applicants (one per table row, carrying a fiscal year) or
//! attribute values (one per distinct `(type, value)` pair, shared across
//! years). Edges only ever join an applicant to an attribute node. The graph
//! is built once during ingestion and then queried read-only.

mod exchange;
mod query;

pub use exchange::{
    exchange_paths, export_pg, import_pg, read_exchange, write_exchange, ExchangeError,
};
pub use query::{ApplicantDetail, RankedNode, SubgraphQuery, SubgraphView};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fiscal year label attached to every applicant.
pub type Year = i32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid node `{id}`: {reason}")]
    InvalidNode { id: String, reason: String },

    #[error("invalid edge ({applicant_id}, {attribute_id}): {reason}")]
    InvalidEdge {
        applicant_id: String,
        attribute_id: String,
        reason: String,
    },

    #[error("node `{id}` already exists with different content")]
    Conflict { id: String },

    #[error("unknown {what} `{key}`")]
    NotFound { what: &'static str, key: String },

    #[error("{0}")]
    Validation(String),
}

impl GraphError {
    pub(crate) fn not_found(what: &'static str, key: impl fmt::Display) -> Self {
        GraphError::NotFound {
            what,
            key: key.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Applicant,
    Attribute,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Applicant => "applicant",
            NodeKind::Attribute => "attribute",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NodeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "applicant" => Ok(NodeKind::Applicant),
            "attribute" => Ok(NodeKind::Attribute),
            other => Err(format!("unknown node kind `{other}`")),
        }
    }
}

/// Identifier of the applicant node for `key` (an id-column value or a row index) in `year`.
pub fn applicant_id(year: Year, key: &str) -> String {
    format!("a:{year}:{key}")
}

/// Identifier of the attribute node holding `value` of attribute type `attr_type`.
pub fn attribute_id(attr_type: &str, value: &str) -> String {
    format!("v:{attr_type}:{value}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRecord {
    pub id: String,
    pub kind: NodeKind,
    /// Attribute type; empty for applicants.
    pub attr_type: String,
    /// Display value.
    pub label: String,
    /// Present iff the node is an applicant.
    pub year: Option<Year>,
    pub props: BTreeMap<String, String>,
}

impl NodeRecord {
    pub fn applicant(year: Year, key: &str) -> Self {
        NodeRecord {
            id: applicant_id(year, key),
            kind: NodeKind::Applicant,
            attr_type: String::new(),
            label: key.to_string(),
            year: Some(year),
            props: BTreeMap::new(),
        }
    }

    pub fn attribute(attr_type: &str, value: &str) -> Self {
        NodeRecord {
            id: attribute_id(attr_type, value),
            kind: NodeKind::Attribute,
            attr_type: attr_type.to_string(),
            label: value.to_string(),
            year: None,
            props: BTreeMap::new(),
        }
    }

    pub fn with_prop(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.props.insert(key.into(), value.into());
        self
    }

    pub fn is_applicant(&self) -> bool {
        self.kind == NodeKind::Applicant
    }

    pub fn is_attribute(&self) -> bool {
        self.kind == NodeKind::Attribute
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let reject = |reason: &str| {
            Err(GraphError::InvalidNode {
                id: self.id.clone(),
                reason: reason.to_string(),
            })
        };
        if self.id.is_empty() {
            return reject("empty id");
        }
        match self.kind {
            NodeKind::Applicant => {
                if self.year.is_none() {
                    return reject("applicant nodes require a year");
                }
                if !self.attr_type.is_empty() {
                    return reject("applicant nodes carry no attribute type");
                }
            }
            NodeKind::Attribute => {
                if self.year.is_some() {
                    return reject("attribute nodes carry no year");
                }
                if self.attr_type.is_empty() {
                    return reject("attribute nodes require a type");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub applicant_id: String,
    pub attribute_id: String,
}

impl EdgeRecord {
    pub fn new(applicant_id: impl Into<String>, attribute_id: impl Into<String>) -> Self {
        EdgeRecord {
            applicant_id: applicant_id.into(),
            attribute_id: attribute_id.into(),
        }
    }
}

/// The multi-partite graph: applicants on one side, attribute nodes grouped
/// by type on the other.
///
/// Equality compares node and edge sets only; the adjacency indexes are
/// derived from them.
#[derive(Debug, Clone, Default)]
pub struct PropertyGraph {
    nodes: BTreeMap<String, NodeRecord>,
    edges: BTreeSet<EdgeRecord>,
    attributes_of: BTreeMap<String, BTreeSet<String>>,
    applicants_of: BTreeMap<String, BTreeSet<String>>,
    by_year: BTreeMap<Year, BTreeSet<String>>,
    by_type: BTreeMap<String, BTreeSet<String>>,
}

impl PartialEq for PropertyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for PropertyGraph {}

impl PropertyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a node. Re-inserting an identical record is a no-op; a
    /// different record under an existing id is rejected.
    pub fn insert_node(&mut self, node: NodeRecord) -> Result<(), GraphError> {
        node.validate()?;
        if let Some(existing) = self.nodes.get(&node.id) {
            return if *existing == node {
                Ok(())
            } else {
                Err(GraphError::Conflict { id: node.id })
            };
        }
        match node.kind {
            NodeKind::Applicant => {
                let year = node.year.expect("validated applicant has a year");
                self.by_year.entry(year).or_default().insert(node.id.clone());
                self.attributes_of.insert(node.id.clone(), BTreeSet::new());
            }
            NodeKind::Attribute => {
                self.by_type
                    .entry(node.attr_type.clone())
                    .or_default()
                    .insert(node.id.clone());
                self.applicants_of.insert(node.id.clone(), BTreeSet::new());
            }
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    /// Inserts an edge between an existing applicant and an existing
    /// attribute node. Duplicate edges are ignored.
    pub fn insert_edge(&mut self, edge: EdgeRecord) -> Result<(), GraphError> {
        let reject = |reason: String| {
            Err(GraphError::InvalidEdge {
                applicant_id: edge.applicant_id.clone(),
                attribute_id: edge.attribute_id.clone(),
                reason,
            })
        };
        match self.nodes.get(&edge.applicant_id) {
            None => return reject(format!("unknown node `{}`", edge.applicant_id)),
            Some(n) if !n.is_applicant() => {
                return reject(format!("`{}` is not an applicant node", edge.applicant_id))
            }
            Some(_) => {}
        }
        match self.nodes.get(&edge.attribute_id) {
            None => return reject(format!("unknown node `{}`", edge.attribute_id)),
            Some(n) if !n.is_attribute() => {
                return reject(format!("`{}` is not an attribute node", edge.attribute_id))
            }
            Some(_) => {}
        }
        if self.edges.contains(&edge) {
            return Ok(());
        }
        self.attributes_of
            .get_mut(&edge.applicant_id)
            .expect("applicant indexed on insert")
            .insert(edge.attribute_id.clone());
        self.applicants_of
            .get_mut(&edge.attribute_id)
            .expect("attribute indexed on insert")
            .insert(edge.applicant_id.clone());
        self.edges.insert(edge);
        Ok(())
    }

    pub fn node(&self, id: &str) -> Option<&NodeRecord> {
        self.nodes.get(id)
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = &NodeRecord> {
        self.nodes.values()
    }

    /// Edges in ascending `(applicant_id, attribute_id)` order.
    pub fn edges(&self) -> impl Iterator<Item = &EdgeRecord> {
        self.edges.iter()
    }

    pub fn contains_edge(&self, applicant_id: &str, attribute_id: &str) -> bool {
        self.attributes_of
            .get(applicant_id)
            .is_some_and(|s| s.contains(attribute_id))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn applicant_count(&self) -> usize {
        self.attributes_of.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.applicants_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Attribute types with their number of distinct values, sorted by type.
    pub fn list_attribute_types(&self) -> Vec<(String, usize)> {
        self.by_type
            .iter()
            .map(|(t, ids)| (t.clone(), ids.len()))
            .collect()
    }

    pub fn has_attribute_type(&self, attr_type: &str) -> bool {
        self.by_type.contains_key(attr_type)
    }

    /// Fiscal years with at least one applicant, ascending.
    pub fn list_years(&self) -> Vec<Year> {
        self.by_year.keys().copied().collect()
    }

    pub fn has_year(&self, year: Year) -> bool {
        self.by_year.contains_key(&year)
    }

    /// Attribute node ids of one type, ascending.
    pub fn attributes_of_type<'a>(&'a self, attr_type: &str) -> impl Iterator<Item = &'a str> + 'a {
        self.by_type
            .get(attr_type)
            .into_iter()
            .flat_map(|ids| ids.iter().map(String::as_str))
    }

    /// Applicant ids of one year, ascending.
    pub fn applicants_in_year(&self, year: Year) -> impl Iterator<Item = &str> + '_ {
        self.by_year
            .get(&year)
            .into_iter()
            .flat_map(|ids| ids.iter().map(String::as_str))
    }

    /// Attribute ids adjacent to an applicant, ascending.
    pub fn attributes_of(&self, applicant_id: &str) -> impl Iterator<Item = &str> + '_ {
        self.attributes_of
            .get(applicant_id)
            .into_iter()
            .flat_map(|ids| ids.iter().map(String::as_str))
    }

    /// Applicant ids adjacent to an attribute node, ascending.
    pub fn applicants_of(&self, attribute_id: &str) -> impl Iterator<Item = &str> + '_ {
        self.applicants_of
            .get(attribute_id)
            .into_iter()
            .flat_map(|ids| ids.iter().map(String::as_str))
    }

    /// Degree of an attribute node restricted to applicants of `year`.
    pub fn occurrence(&self, attribute_id: &str, year: Year) -> usize {
        let Some(year_set) = self.by_year.get(&year) else {
            return 0;
        };
        self.applicants_of
            .get(attribute_id)
            .map_or(0, |apps| apps.iter().filter(|a| year_set.contains(*a)).count())
    }

    /// Full degree of a node.
    pub fn degree(&self, id: &str) -> usize {
        self.attributes_of
            .get(id)
            .or_else(|| self.applicants_of.get(id))
            .map_or(0, BTreeSet::len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> PropertyGraph {
        let mut g = PropertyGraph::new();
        g.insert_node(NodeRecord::applicant(2019, "0")).unwrap();
        g.insert_node(NodeRecord::attribute("english", "Business")).unwrap();
        g.insert_edge(EdgeRecord::new("a:2019:0", "v:english:Business"))
            .unwrap();
        g
    }

    #[test]
    fn duplicate_edge_is_noop() {
        let mut g = tiny();
        g.insert_edge(EdgeRecord::new("a:2019:0", "v:english:Business"))
            .unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree("a:2019:0"), 1);
    }

    #[test]
    fn identical_node_reinsert_is_noop() {
        let mut g = tiny();
        g.insert_node(NodeRecord::attribute("english", "Business")).unwrap();
        assert_eq!(g.node_count(), 2);
    }

    #[test]
    fn conflicting_node_rejected() {
        let mut g = tiny();
        let changed = NodeRecord::applicant(2019, "0").with_prop("name", "Bob");
        assert!(matches!(g.insert_node(changed), Err(GraphError::Conflict { .. })));
    }

    #[test]
    fn edge_from_attribute_rejected() {
        let mut g = tiny();
        g.insert_node(NodeRecord::attribute("region", "Kansai")).unwrap();
        let err = g
            .insert_edge(EdgeRecord::new("v:region:Kansai", "v:english:Business"))
            .unwrap_err();
        assert!(matches!(err, GraphError::InvalidEdge { .. }), "{err}");
    }

    #[test]
    fn dangling_edge_rejected() {
        let mut g = tiny();
        assert!(g
            .insert_edge(EdgeRecord::new("a:2019:0", "v:english:Native"))
            .is_err());
    }

    #[test]
    fn attribute_with_year_rejected() {
        let mut g = PropertyGraph::new();
        let mut node = NodeRecord::attribute("english", "Business");
        node.year = Some(2019);
        assert!(matches!(g.insert_node(node), Err(GraphError::InvalidNode { .. })));
    }

    #[test]
    fn applicant_without_year_or_with_type_rejected() {
        let mut g = PropertyGraph::new();
        let mut node = NodeRecord::applicant(2019, "0");
        node.year = None;
        assert!(g.insert_node(node).is_err());
        let mut node = NodeRecord::applicant(2019, "0");
        node.attr_type = "english".into();
        assert!(g.insert_node(node).is_err());
    }

    #[test]
    fn empty_graph_has_no_years() {
        let g = PropertyGraph::new();
        assert!(g.list_years().is_empty());
        assert!(g.list_attribute_types().is_empty());
    }

    #[test]
    fn occurrence_is_year_restricted() {
        let mut g = tiny();
        g.insert_node(NodeRecord::applicant(2020, "0")).unwrap();
        g.insert_edge(EdgeRecord::new("a:2020:0", "v:english:Business"))
            .unwrap();
        assert_eq!(g.occurrence("v:english:Business", 2019), 1);
        assert_eq!(g.occurrence("v:english:Business", 2020), 1);
        assert_eq!(g.occurrence("v:english:Business", 2021), 0);
        assert_eq!(g.degree("v:english:Business"), 2);
        assert_eq!(g.list_years(), vec![2019, 2020]);
    }
}
