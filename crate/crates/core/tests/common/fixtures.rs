//! Hand-built graphs and views for layout and transition tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use yeargraph_core::layout::primary_slots;
use yeargraph_core::{
    EdgeRecord, InitialLayout, LayoutParams, NodeRecord, Point, PropertyGraph, SubgraphQuery, SubgraphView,
};

/// `np` primaries, `ns` secondaries, `na` applicants in 2019. Each applicant
/// links to one primary and, with probability 0.9, one secondary; the first
/// applicants cover every attribute so the view has exactly `np + ns + na` nodes
/// when `na >= max(np, ns)`.
pub fn random_view(seed: u64, np: usize, ns: usize, na: usize) -> (PropertyGraph, SubgraphView) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = PropertyGraph::new();
    for i in 0..np {
        g.insert_node(NodeRecord::attribute("p", &format!("p{i}"))).unwrap();
    }
    for i in 0..ns {
        g.insert_node(NodeRecord::attribute("s", &format!("s{i}"))).unwrap();
    }
    for a in 0..na {
        let n = NodeRecord::applicant(2019, &a.to_string());
        let id = n.id.clone();
        g.insert_node(n).unwrap();
        let p = if a < np { a } else { rng.random_range(0..np) };
        g.insert_edge(EdgeRecord::new(&id, format!("v:p:p{p}"))).unwrap();
        if a < ns || rng.random_bool(0.9) {
            let s = if a < ns { a } else { rng.random_range(0..ns) };
            g.insert_edge(EdgeRecord::new(&id, format!("v:s:s{s}"))).unwrap();
        }
    }
    let view = g.query_subgraph(&SubgraphQuery::new(2019, "p", "s")).unwrap();
    (g, view)
}

/// Planted geometry: primaries sit at circular anchors, each secondary gets a
/// hidden home in the disc, and an applicant of secondary `s` picks primary `p`
/// with weight `exp(-|home_s - anchor_p| / 100)`. Returns the primary anchors to
/// pin before running the layout.
pub fn planted_view(seed: u64, np: usize, ns: usize, na: usize) -> (PropertyGraph, SubgraphView, Vec<(String, Point)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = PropertyGraph::new();
    let anchors = primary_slots(InitialLayout::Circular, np, &LayoutParams::default());
    let homes: Vec<Point> = (0..ns)
        .map(|_| {
            let r = 300.0 * rng.random::<f64>().sqrt();
            let t = rng.random::<f64>() * std::f64::consts::TAU;
            Point::new(r * t.cos(), r * t.sin())
        })
        .collect();
    for i in 0..np {
        g.insert_node(NodeRecord::attribute("p", &format!("p{i}"))).unwrap();
    }
    for i in 0..ns {
        g.insert_node(NodeRecord::attribute("s", &format!("s{i}"))).unwrap();
    }
    for a in 0..na {
        let n = NodeRecord::applicant(2019, &a.to_string());
        let id = n.id.clone();
        g.insert_node(n).unwrap();
        let s = if a < ns { a } else { rng.random_range(0..ns) };
        let w: Vec<f64> = anchors.iter().map(|p| (-p.distance(homes[s]) / 100.0).exp()).collect();
        let mut u = rng.random::<f64>() * w.iter().sum::<f64>();
        let mut p = np - 1;
        for (i, wi) in w.iter().enumerate() {
            if u < *wi {
                p = i;
                break;
            }
            u -= wi;
        }
        g.insert_edge(EdgeRecord::new(&id, format!("v:p:p{p}"))).unwrap();
        g.insert_edge(EdgeRecord::new(&id, format!("v:s:s{s}"))).unwrap();
    }
    let view = g.query_subgraph(&SubgraphQuery::new(2019, "p", "s")).unwrap();
    let pins = (0..np).map(|i| (format!("v:p:p{i}"), anchors[i])).collect();
    (g, view, pins)
}

/// Number of applicants linked to both attribute nodes.
pub fn shared_applicants(g: &PropertyGraph, a: &str, b: &str) -> usize {
    g.applicants_of(a).filter(|app| g.contains_edge(app, b)).count()
}
