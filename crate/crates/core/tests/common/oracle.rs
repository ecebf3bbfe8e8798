//! Brute-force reference computations for graph construction and queries.
//!
//! Everything here works directly from CSV text and the synthetic spec, by
//! scanning rows and cells. None of it goes through the ingest or graph
//! store code paths it is used to check.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use yeargraph_core::synth::{AttributeSpec, ConditionSpec, DriftSpec, RenameSpec, SyntheticSpec};
use yeargraph_core::PropertyGraph;

/// One table row as the oracle sees it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub year: i32,
    pub id: String,
    pub props: BTreeMap<String, String>,
    /// Distinct `(type, value)` pairs of non-empty attribute cells.
    pub attrs: BTreeSet<(String, String)>,
    /// Number of non-empty attribute cells (before de-duplication).
    pub filled_cells: usize,
}

/// Flattened node: (kind, type, label, year, props).
pub type FlatNode = (String, String, String, Option<i32>, BTreeMap<String, String>);

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FlatGraph {
    pub nodes: BTreeMap<String, FlatNode>,
    pub edges: BTreeSet<(String, String)>,
}

pub fn flatten(g: &PropertyGraph) -> FlatGraph {
    FlatGraph {
        nodes: g
            .nodes()
            .map(|n| {
                (
                    n.id.clone(),
                    (
                        n.kind.as_str().to_string(),
                        n.attr_type.clone(),
                        n.label.clone(),
                        n.year,
                        n.props.clone(),
                    ),
                )
            })
            .collect(),
        edges: g
            .edges()
            .map(|e| (e.applicant_id.clone(), e.attribute_id.clone()))
            .collect(),
    }
}

/// Scans generated CSV tables cell by cell.
pub fn scan_rows(spec: &SyntheticSpec, tables: &[(i32, String)]) -> Vec<Row> {
    let mut ordered: Vec<&(i32, String)> = tables.iter().collect();
    ordered.sort_by_key(|(y, _)| *y);
    let mut out = Vec::new();
    for (year, text) in ordered {
        let mut lines = text.lines();
        let header: Vec<String> = split_csv_line(lines.next().unwrap_or(""))
            .into_iter()
            .map(|h| {
                spec.renames
                    .iter()
                    .find(|r| r.year == *year && r.source == h)
                    .map_or(h.clone(), |r| r.column.clone())
            })
            .collect();
        for (row_index, line) in lines.enumerate() {
            let cells = split_csv_line(line);
            assert_eq!(cells.len(), header.len(), "oracle: ragged row");
            let cell = |name: &str| header.iter().position(|h| h == name).map(|i| cells[i].trim().to_string());
            let id = match &spec.id_column {
                Some(c) => match cell(c) {
                    Some(v) if !v.is_empty() => v,
                    _ => row_index.to_string(),
                },
                None => row_index.to_string(),
            };
            let mut props = BTreeMap::new();
            for p in &spec.properties {
                if let Some(v) = cell(p).filter(|v| !v.is_empty()) {
                    props.insert(p.clone(), v);
                }
            }
            let mut attrs = BTreeSet::new();
            let mut filled_cells = 0;
            for a in &spec.attributes {
                for col in a.columns() {
                    if let Some(v) = cell(&col).filter(|v| !v.is_empty()) {
                        filled_cells += 1;
                        attrs.insert((a.name.clone(), v));
                    }
                }
            }
            out.push(Row {
                year: *year,
                id,
                props,
                attrs,
                filled_cells,
            });
        }
    }
    out
}

/// Minimal RFC-4180 line splitter (no embedded newlines).
fn split_csv_line(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        match (quoted, c) {
            (true, '"') if chars.peek() == Some(&'"') => {
                chars.next();
                cur.push('"');
            }
            (true, '"') => quoted = false,
            (false, '"') => quoted = true,
            (false, ',') => out.push(std::mem::take(&mut cur)),
            (_, c) => cur.push(c),
        }
    }
    out.push(cur);
    out
}

pub fn expected_graph(rows: &[Row]) -> FlatGraph {
    let mut g = FlatGraph::default();
    for r in rows {
        let aid = format!("a:{}:{}", r.year, r.id);
        g.nodes.insert(
            aid.clone(),
            ("applicant".into(), String::new(), r.id.clone(), Some(r.year), r.props.clone()),
        );
        for (t, v) in &r.attrs {
            let vid = format!("v:{t}:{v}");
            g.nodes
                .insert(vid.clone(), ("attribute".into(), t.clone(), v.clone(), None, BTreeMap::new()));
            g.edges.insert((aid.clone(), vid));
        }
    }
    g
}

/// Expected content of `G(year, x, y)` with primary slicing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedView {
    /// (attribute id, occurrence) in view order.
    pub primaries: Vec<(String, usize)>,
    pub secondaries: BTreeSet<String>,
    pub applicants: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

pub fn expected_view(
    rows: &[Row],
    year: i32,
    x: &str,
    y: &str,
    limit: Option<usize>,
    offset: Option<usize>,
) -> ExpectedView {
    let year_rows: Vec<&Row> = rows.iter().filter(|r| r.year == year).collect();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for r in &year_rows {
        for (t, v) in &r.attrs {
            if t == x {
                *counts.entry(v.clone()).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let kept: Vec<(String, usize)> = ranked
        .into_iter()
        .skip(offset.unwrap_or(0))
        .take(limit.unwrap_or(usize::MAX))
        .collect();
    let kept_values: BTreeSet<&str> = kept.iter().map(|(v, _)| v.as_str()).collect();
    let mut view = ExpectedView {
        primaries: kept.iter().map(|(v, c)| (format!("v:{x}:{v}"), *c)).collect(),
        secondaries: BTreeSet::new(),
        applicants: BTreeSet::new(),
        edges: BTreeSet::new(),
    };
    for r in year_rows {
        if !r.attrs.iter().any(|(t, v)| t == x && kept_values.contains(v.as_str())) {
            continue;
        }
        let aid = format!("a:{}:{}", r.year, r.id);
        view.applicants.insert(aid.clone());
        for (t, v) in &r.attrs {
            let vid = format!("v:{t}:{v}");
            if t == x && kept_values.contains(v.as_str()) {
                view.edges.insert((aid.clone(), vid));
            } else if t == y {
                view.secondaries.insert(vid.clone());
                view.edges.insert((aid.clone(), vid));
            }
        }
    }
    view
}

/// Number of applicants of `year` holding `(attr_type, value)`.
pub fn cell_count(rows: &[Row], year: i32, attr_type: &str, value: &str) -> usize {
    rows.iter()
        .filter(|r| r.year == year && r.attrs.contains(&(attr_type.to_string(), value.to_string())))
        .count()
}

/// A random spec within the bounds of the construction acceptance check:
/// at most 7 years, 500 rows per year and 12 attribute rules, one of which
/// is a 3-column group.
pub fn random_spec(seed: u64) -> SyntheticSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_years = rng.random_range(1..=7);
    let first = rng.random_range(2010..2016);
    let years: Vec<i32> = (0..n_years).map(|i| first + i).collect();
    let n_attrs = rng.random_range(2..=12usize);
    let group_at = rng.random_range(0..n_attrs);
    let mut attributes: Vec<AttributeSpec> = Vec::new();
    for i in 0..n_attrs {
        let vocab = rng.random_range(1..=9usize);
        let values: Vec<String> = (0..vocab).map(|v| format!("val{i}_{v}")).collect();
        let weights: Option<Vec<f64>> = rng
            .random_bool(0.5)
            .then(|| (0..vocab).map(|_| rng.random_range(0.1..5.0)).collect());
        let drift = if rng.random_bool(0.3) {
            vec![DriftSpec {
                year: years[rng.random_range(0..years.len())],
                weights: (0..vocab).map(|_| rng.random_range(0.1..5.0)).collect(),
            }]
        } else {
            Vec::new()
        };
        let given = match attributes.iter().find(|a| a.group_size.is_none()) {
            Some(base) if rng.random_bool(0.3) => vec![ConditionSpec {
                attribute: base.name.clone(),
                value: base.values[0].clone(),
                years: None,
                weights: (0..vocab).map(|v| if v == 0 { 1.0 } else { 0.2 }).collect(),
            }],
            _ => Vec::new(),
        };
        attributes.push(AttributeSpec {
            name: if i == group_at { format!("history {i}.") } else { format!("attr {i}") },
            values,
            missing: if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..0.6) },
            weights,
            group_size: (i == group_at).then_some(3),
            drift,
            given,
        });
    }
    let renames = if rng.random_bool(0.5) {
        vec![RenameSpec {
            year: years[0],
            column: attributes[0].columns()[0].clone(),
            source: "legacy name".into(),
        }]
    } else {
        Vec::new()
    };
    SyntheticSpec {
        version: 1,
        seed: rng.random(),
        years,
        applicants_per_year: rng.random_range(0..=500),
        id_column: rng.random_bool(0.7).then(|| "applicant_id".to_string()),
        properties: if rng.random_bool(0.5) { vec!["name".into()] } else { Vec::new() },
        noise_columns: vec!["essay".into()],
        attributes,
        renames,
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|a, b| v[*a].partial_cmp(&v[*b]).unwrap());
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for k in &idx[i..=j] {
            r[*k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
