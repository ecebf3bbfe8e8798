//! Response bodies. Field order is declaration order; floats go through [`Fixed6`].

use serde::Serialize;
use yeargraph_core::{EdgeRecord, LayoutState, NodeRecord, Point, SubgraphView, TransitionDiff, Year};

use crate::json::Fixed6;

#[derive(Debug, Serialize)]
pub struct DatasetSummary {
    pub id: String,
    pub years: Vec<Year>,
    pub applicants: usize,
    pub attributes: usize,
    pub edges: usize,
}

#[derive(Debug, Serialize)]
pub struct AttributeType {
    #[serde(rename = "type")]
    pub attr_type: String,
    /// Number of distinct values.
    pub values: usize,
}

#[derive(Debug, Serialize)]
pub struct NodePayload {
    pub id: String,
    /// `primary`, `secondary` or `applicant`.
    pub kind: &'static str,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    pub attr_type: Option<String>,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub year: Option<Year>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occurrence: Option<usize>,
    pub x: Fixed6,
    pub y: Fixed6,
    pub pinned: bool,
}

#[derive(Debug, Serialize)]
pub struct EdgePayload {
    pub applicant_id: String,
    pub attribute_id: String,
}

impl From<&EdgeRecord> for EdgePayload {
    fn from(e: &EdgeRecord) -> Self {
        EdgePayload {
            applicant_id: e.applicant_id.clone(),
            attribute_id: e.attribute_id.clone(),
        }
    }
}

pub fn edges(view: &SubgraphView) -> Vec<EdgePayload> {
    view.edges.iter().map(EdgePayload::from).collect()
}

/// Every node of the view, in view order, with its current position.
pub fn nodes(view: &SubgraphView, state: &LayoutState) -> Vec<NodePayload> {
    let node = |n: &NodeRecord, kind: &'static str, occurrence: Option<usize>| {
        let p = state.position(&n.id).unwrap_or_default();
        NodePayload {
            id: n.id.clone(),
            kind,
            attr_type: n.is_attribute().then(|| n.attr_type.clone()),
            label: n.label.clone(),
            year: n.year,
            occurrence,
            x: Fixed6(p.x),
            y: Fixed6(p.y),
            pinned: state.is_pinned(&n.id),
        }
    };
    view.primary_nodes
        .iter()
        .map(|r| node(&r.node, "primary", Some(r.occurrence)))
        .chain(view.secondary_nodes.iter().map(|n| node(n, "secondary", None)))
        .chain(view.applicant_nodes.iter().map(|n| node(n, "applicant", None)))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct SessionPayload {
    pub session_id: String,
    pub dataset: String,
    pub year: Year,
    pub x: String,
    pub y: String,
    pub limit: Option<usize>,
    pub offset: usize,
    pub layout: &'static str,
    pub seed: u64,
    pub iteration: u64,
    pub nodes: Vec<NodePayload>,
    pub edges: Vec<EdgePayload>,
}

#[derive(Debug, Serialize)]
pub struct PositionPayload {
    pub id: String,
    pub x: Fixed6,
    pub y: Fixed6,
}

impl PositionPayload {
    pub fn new(id: &str, p: Point) -> Self {
        PositionPayload {
            id: id.to_string(),
            x: Fixed6(p.x),
            y: Fixed6(p.y),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct StepPayload {
    pub session_id: String,
    /// Total iterations run in this session.
    pub iteration: u64,
    /// Iterations run by this request.
    pub iterations: u64,
    pub converged: bool,
    pub max_displacement: Fixed6,
    /// Free nodes whose position changed, ascending id.
    pub changed: Vec<PositionPayload>,
}

#[derive(Debug, Serialize)]
pub struct MovePayload {
    pub session_id: String,
    pub node_id: String,
    pub x: Fixed6,
    pub y: Fixed6,
}

#[derive(Debug, Serialize)]
pub struct KeptPair {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Serialize)]
pub struct TransitionPayload {
    pub session_id: String,
    pub from_year: Year,
    pub to_year: Year,
    pub kept_applicants: Vec<KeptPair>,
    pub removed_applicants: Vec<String>,
    pub added_applicants: Vec<String>,
    pub retained_attributes: Vec<String>,
    pub removed_attributes: Vec<String>,
    pub added_attributes: Vec<String>,
    pub removed_edges: Vec<EdgePayload>,
    pub added_edges: Vec<EdgePayload>,
    /// The new view with refreshed positions.
    pub nodes: Vec<NodePayload>,
    pub edges: Vec<EdgePayload>,
}

impl TransitionPayload {
    pub fn new(session_id: &str, diff: TransitionDiff, before: &SubgraphView, after: &SubgraphView, state: &LayoutState) -> Self {
        let (old_attrs, new_attrs) = (before.attribute_ids(), after.attribute_ids());
        TransitionPayload {
            session_id: session_id.to_string(),
            from_year: diff.from_year,
            to_year: diff.to_year,
            kept_applicants: diff
                .kept_applicants
                .into_iter()
                .map(|(from, to)| KeptPair { from, to })
                .collect(),
            removed_applicants: diff.removed_applicants,
            added_applicants: diff.added_applicants,
            retained_attributes: diff.retained_attributes,
            removed_attributes: old_attrs.difference(&new_attrs).map(|s| s.to_string()).collect(),
            added_attributes: new_attrs.difference(&old_attrs).map(|s| s.to_string()).collect(),
            removed_edges: diff.removed_edges.iter().map(EdgePayload::from).collect(),
            added_edges: diff.added_edges.iter().map(EdgePayload::from).collect(),
            nodes: nodes(after, state),
            edges: edges(after),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SeriesPoint {
    pub year: Year,
    pub degree: usize,
}

#[derive(Debug, Serialize)]
pub struct SeriesPayload {
    pub attribute_id: String,
    pub label: String,
    pub total: usize,
    pub points: Vec<SeriesPoint>,
}

#[derive(Debug, Serialize)]
pub struct ChartPayload {
    pub dataset: String,
    pub x: String,
    pub years: Vec<Year>,
    pub series: Vec<SeriesPayload>,
}

#[derive(Debug, Serialize)]
pub struct AttributeValue {
    pub attribute_id: String,
    #[serde(rename = "type")]
    pub attr_type: String,
    pub value: String,
}

#[derive(Debug, Serialize)]
pub struct ApplicantPayload {
    pub id: String,
    pub year: Option<Year>,
    pub attributes: Vec<AttributeValue>,
}
