use std::collections::{BTreeMap, BTreeSet};

use super::{EdgeRecord, GraphError, NodeRecord, PropertyGraph, Year};

/// Parameters selecting `G(year, x, y)` and the primary slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphQuery {
    pub year: Year,
    pub primary_type: String,
    pub secondary_type: String,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
}

impl SubgraphQuery {
    pub fn new(year: Year, primary_type: impl Into<String>, secondary_type: impl Into<String>) -> Self {
        SubgraphQuery {
            year,
            primary_type: primary_type.into(),
            secondary_type: secondary_type.into(),
            limit: None,
            offset: None,
        }
    }

    pub fn limit(mut self, limit: usize) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn offset(mut self, offset: usize) -> Self {
        self.offset = Some(offset);
        self
    }

    /// Same attribute pair and slice, different year.
    pub fn at_year(&self, year: Year) -> Self {
        SubgraphQuery {
            year,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedNode {
    pub node: NodeRecord,
    /// Degree restricted to the applicants of the view's year.
    pub occurrence: usize,
}

/// A bipartite attribute-vs-attribute slice of the graph for one year.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphView {
    pub year: Year,
    pub primary_type: String,
    pub secondary_type: String,
    pub limit: Option<usize>,
    pub offset: usize,
    /// Occurrence descending, ties by label ascending.
    pub primary_nodes: Vec<RankedNode>,
    /// Ascending id.
    pub secondary_nodes: Vec<NodeRecord>,
    /// Ascending id.
    pub applicant_nodes: Vec<NodeRecord>,
    /// Ascending `(applicant_id, attribute_id)`.
    pub edges: Vec<EdgeRecord>,
}

impl SubgraphView {
    pub fn node_count(&self) -> usize {
        self.primary_nodes.len() + self.secondary_nodes.len() + self.applicant_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_count() == 0
    }

    /// Every node in the view: primaries (view order), secondaries, applicants.
    pub fn nodes(&self) -> impl Iterator<Item = &NodeRecord> {
        self.primary_nodes
            .iter()
            .map(|r| &r.node)
            .chain(self.secondary_nodes.iter())
            .chain(self.applicant_nodes.iter())
    }

    pub fn primary_ids(&self) -> impl Iterator<Item = &str> {
        self.primary_nodes.iter().map(|r| r.node.id.as_str())
    }

    /// Ids of primary and secondary nodes.
    pub fn attribute_ids(&self) -> BTreeSet<&str> {
        self.primary_ids()
            .chain(self.secondary_nodes.iter().map(|n| n.id.as_str()))
            .collect()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes().any(|n| n.id == id)
    }

    /// In-view edge signature of every applicant: its attribute endpoints, sorted.
    pub fn signatures(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut sigs: BTreeMap<&str, Vec<&str>> = self
            .applicant_nodes
            .iter()
            .map(|a| (a.id.as_str(), Vec::new()))
            .collect();
        for e in &self.edges {
            if let Some(sig) = sigs.get_mut(e.applicant_id.as_str()) {
                sig.push(e.attribute_id.as_str());
            }
        }
        for sig in sigs.values_mut() {
            sig.sort_unstable();
        }
        sigs
    }
}

/// An applicant together with every attribute node it is linked to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApplicantDetail {
    pub applicant: NodeRecord,
    /// Ascending id.
    pub attributes: Vec<NodeRecord>,
}

impl PropertyGraph {
    /// Attribute nodes of `attr_type` ranked by occurrence (descending, ties by
    /// label). With `year = None` the rank uses the full degree. Nodes with zero
    /// occurrence are dropped.
    pub fn rank_attributes(&self, attr_type: &str, year: Option<Year>) -> Vec<(&NodeRecord, usize)> {
        let mut ranked: Vec<(&NodeRecord, usize)> = self
            .attributes_of_type(attr_type)
            .map(|id| {
                let count = match year {
                    Some(y) => self.occurrence(id, y),
                    None => self.degree(id),
                };
                (&self.nodes[id], count)
            })
            .filter(|(_, count)| *count > 0)
            .collect();
        ranked.sort_by(|(a, ca), (b, cb)| {
            cb.cmp(ca)
                .then_with(|| a.label.cmp(&b.label))
                .then_with(|| a.id.cmp(&b.id))
        });
        ranked
    }

    pub fn query_subgraph(&self, query: &SubgraphQuery) -> Result<SubgraphView, GraphError> {
        if query.primary_type == query.secondary_type {
            return Err(GraphError::Validation(format!(
                "primary and secondary attribute types must differ (both `{}`)",
                query.primary_type
            )));
        }
        for t in [&query.primary_type, &query.secondary_type] {
            if !self.has_attribute_type(t) {
                return Err(GraphError::not_found("attribute type", t));
            }
        }
        if !self.has_year(query.year) {
            return Err(GraphError::not_found("year", query.year));
        }

        let offset = query.offset.unwrap_or(0);
        let ranked = self.rank_attributes(&query.primary_type, Some(query.year));
        let primary_nodes: Vec<RankedNode> = ranked
            .into_iter()
            .skip(offset)
            .take(query.limit.unwrap_or(usize::MAX))
            .map(|(node, occurrence)| RankedNode {
                node: node.clone(),
                occurrence,
            })
            .collect();
        let primary_set: BTreeSet<&str> = primary_nodes.iter().map(|r| r.node.id.as_str()).collect();

        let mut applicant_nodes = Vec::new();
        let mut edges = Vec::new();
        let mut secondary_set = BTreeSet::new();
        for app in self.applicants_in_year(query.year) {
            let attrs: Vec<&str> = self.attributes_of(app).collect();
            if !attrs.iter().any(|a| primary_set.contains(a)) {
                continue;
            }
            applicant_nodes.push(self.nodes[app].clone());
            for attr in attrs {
                let keep = if primary_set.contains(attr) {
                    true
                } else {
                    let node = &self.nodes[attr];
                    node.attr_type == query.secondary_type
                };
                if keep {
                    if !primary_set.contains(attr) {
                        secondary_set.insert(attr);
                    }
                    edges.push(EdgeRecord::new(app, attr));
                }
            }
        }
        let secondary_nodes = secondary_set
            .into_iter()
            .map(|id| self.nodes[id].clone())
            .collect();

        Ok(SubgraphView {
            year: query.year,
            primary_type: query.primary_type.clone(),
            secondary_type: query.secondary_type.clone(),
            limit: query.limit,
            offset,
            primary_nodes,
            secondary_nodes,
            applicant_nodes,
            edges,
        })
    }

    /// The applicant and all of its attributes, of every type.
    pub fn get_applicant(&self, id: &str) -> Result<ApplicantDetail, GraphError> {
        let applicant = self
            .node(id)
            .filter(|n| n.is_applicant())
            .ok_or_else(|| GraphError::not_found("applicant", id))?;
        let attributes = self
            .attributes_of(id)
            .map(|a| self.nodes[a].clone())
            .collect();
        Ok(ApplicantDetail {
            applicant: applicant.clone(),
            attributes,
        })
    }
}
