//! Pinned force-directed layout.
//!
//! Primary attribute nodes are placed by a closed-form initial layout (star,
//! circular or linear) and stay pinned; secondary attribute and applicant
//! nodes are moved by a ForceAtlas2-style simulation with degree-weighted
//! repulsion, linear attraction along edges, gravity toward the origin and
//! per-node swing damping. A free node moves by
//! `speed * F / ((deg + 1) * (1 + sqrt(|F - F_prev|)))`, clamped to
//! `max_step`; dividing by the node mass keeps high-degree nodes from
//! overshooting their spring equilibrium. Coordinates use the screen
//! convention (y grows downward).

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use accurate::sum::i_fast_sum_in_place;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphstore::SubgraphView;

/// Distance below which two nodes count as coincident.
const COINCIDENT: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("invalid layout parameter: {0}")]
    InvalidParams(String),

    #[error("{0}")]
    Validation(String),

    #[error("node `{0}` is not part of the layout")]
    UnknownNode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Bitwise equality, distinguishing `0.0` from `-0.0`.
    pub fn bits_eq(self, other: Point) -> bool {
        self.x.to_bits() == other.x.to_bits() && self.y.to_bits() == other.y.to_bits()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, o: Point) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialLayout {
    Star,
    Circular,
    Linear,
}

impl InitialLayout {
    pub fn as_str(self) -> &'static str {
        match self {
            InitialLayout::Star => "star",
            InitialLayout::Circular => "circular",
            InitialLayout::Linear => "linear",
        }
    }
}

impl fmt::Display for InitialLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitialLayout {
    type Err = LayoutError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "star" => Ok(InitialLayout::Star),
            "circular" => Ok(InitialLayout::Circular),
            "linear" => Ok(InitialLayout::Linear),
            other => Err(LayoutError::Validation(format!("unknown layout kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    /// Repulsion strength.
    pub repulsion: f64,
    /// Gravity strength toward the origin; may be zero.
    pub gravity: f64,
    pub speed_factor: f64,
    /// Per-iteration displacement clamp.
    pub max_step: f64,
    /// Ring radius for circular and star placements.
    pub radius: f64,
    pub linear_spacing: f64,
    pub seed: u64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            repulsion: 10.0,
            gravity: 1.0,
            speed_factor: 1.0,
            max_step: 10.0,
            radius: 300.0,
            linear_spacing: 120.0,
            seed: 0,
        }
    }
}

impl LayoutParams {
    pub fn with_seed(seed: u64) -> Self {
        LayoutParams {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        let positive = [
            ("repulsion", self.repulsion),
            ("speed_factor", self.speed_factor),
            ("max_step", self.max_step),
            ("radius", self.radius),
            ("linear_spacing", self.linear_spacing),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(LayoutError::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            return Err(LayoutError::InvalidParams(format!(
                "gravity must be >= 0, got {}",
                self.gravity
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutState {
    pub positions: BTreeMap<String, Point>,
    pub pinned: BTreeSet<String>,
    /// Force applied to each free node in the previous iteration.
    pub prev_force: BTreeMap<String, Point>,
    pub params: LayoutParams,
    pub iteration: u64,
}

impl LayoutState {
    pub fn position(&self, id: &str) -> Option<Point> {
        self.positions.get(id).copied()
    }

    pub fn is_pinned(&self, id: &str) -> bool {
        self.pinned.contains(id)
    }
}

/// Closed-form positions of `k` primary nodes in view order.
pub fn primary_slots(kind: InitialLayout, k: usize, params: &LayoutParams) -> Vec<Point> {
    let ring = |count: usize, radius: f64| -> Vec<Point> {
        (0..count)
            .map(|i| {
                let theta = -PI / 2.0 + 2.0 * PI * i as f64 / count as f64;
                Point::new(radius * theta.cos(), radius * theta.sin())
            })
            .collect()
    };
    match kind {
        InitialLayout::Circular => ring(k, params.radius),
        InitialLayout::Linear => {
            let s = params.linear_spacing;
            let shift = (k as f64 - 1.0) * s / 2.0;
            (0..k).map(|i| Point::new(i as f64 * s - shift, 0.0)).collect()
        }
        InitialLayout::Star => {
            if k == 0 {
                return Vec::new();
            }
            let mut slots = vec![Point::ORIGIN];
            slots.extend(ring(k - 1, params.radius));
            slots
        }
    }
}

/// 64-bit FNV-1a; stable across platforms and releases.
fn fnv1a(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for b in *part {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        // separator so ("ab","c") and ("a","bc") differ
        h ^= 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic pseudo-random position inside the disc of radius `radius`.
pub fn seeded_position(seed: u64, id: &str, radius: f64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(&[&seed.to_le_bytes(), id.as_bytes()]));
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Point::new(r * theta.cos(), r * theta.sin())
}

/// Unit direction pushing `a` away from a coincident `b`; the opposite for `b`.
fn coincident_direction(a: &str, b: &str) -> Point {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let theta = (fnv1a(&[lo.as_bytes(), hi.as_bytes()]) as f64 / u64::MAX as f64) * 2.0 * PI;
    Point::new(theta.cos(), theta.sin()) * sign
}

pub fn initial_layout(
    view: &SubgraphView,
    kind: InitialLayout,
    params: LayoutParams,
) -> Result<LayoutState, LayoutError> {
    params.validate()?;
    if view.primary_nodes.is_empty() {
        return Err(LayoutError::Validation("view has no primary attribute nodes".into()));
    }
    let slots = primary_slots(kind, view.primary_nodes.len(), &params);
    let mut positions = BTreeMap::new();
    let mut pinned = BTreeSet::new();
    for (ranked, slot) in view.primary_nodes.iter().zip(slots) {
        positions.insert(ranked.node.id.clone(), slot);
        pinned.insert(ranked.node.id.clone());
    }
    for node in view.secondary_nodes.iter().chain(&view.applicant_nodes) {
        positions.insert(
            node.id.clone(),
            seeded_position(params.seed, &node.id, params.radius / 2.0),
        );
    }
    Ok(LayoutState {
        positions,
        pinned,
        prev_force: BTreeMap::new(),
        params,
        iteration: 0,
    })
}

/// Index-based topology of a view, reused across iterations.
#[derive(Debug, Clone)]
pub struct ForceGraph {
    ids: Vec<String>,
    /// Degree within the view plus one.
    mass: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
}

impl ForceGraph {
    pub fn new(view: &SubgraphView) -> Self {
        let ids: Vec<String> = view.nodes().map(|n| n.id.clone()).collect();
        let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut neighbors = vec![Vec::new(); ids.len()];
        for e in &view.edges {
            if let (Some(&a), Some(&b)) = (
                index.get(e.applicant_id.as_str()),
                index.get(e.attribute_id.as_str()),
            ) {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        let mass = neighbors.iter().map(|n| n.len() as f64 + 1.0).collect();
        ForceGraph { ids, mass, neighbors }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Largest displacement of any free node in this iteration.
    pub max_displacement: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunReport {
    pub iterations: u64,
    pub converged: bool,
    pub max_displacement: f64,
}

/// Scratch buffers for the force components of one node.
#[derive(Default)]
struct Terms {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Terms {
    fn push(&mut self, p: Point) {
        self.x.push(p.x);
        self.y.push(p.y);
    }

    /// Correctly rounded total, so the result does not depend on term order.
    fn total(&mut self) -> Point {
        let p = Point::new(i_fast_sum_in_place(&mut self.x), i_fast_sum_in_place(&mut self.y));
        self.x.clear();
        self.y.clear();
        p
    }
}

/// Net force on node `i` from the positions of the previous iteration.
fn net_force(graph: &ForceGraph, pos: &[Point], i: usize, params: &LayoutParams, terms: &mut Terms) -> Point {
    let p = pos[i];
    for j in 0..graph.len() {
        if j == i {
            continue;
        }
        let delta = p - pos[j];
        let d = delta.norm();
        let magnitude = params.repulsion * graph.mass[i] * graph.mass[j];
        if d < COINCIDENT {
            terms.push(coincident_direction(&graph.ids[i], &graph.ids[j]) * (magnitude / COINCIDENT));
        } else {
            // magnitude / d along delta / d
            terms.push(delta * (magnitude / (d * d)));
        }
    }
    for &j in &graph.neighbors[i] {
        terms.push(pos[j] - p);
    }
    let r = p.norm();
    if r > 0.0 && params.gravity > 0.0 {
        terms.push(p * (-params.gravity * graph.mass[i] / r));
    }
    terms.total()
}

/// One synchronous iteration over a precompiled topology.
pub fn fa2_step_compiled(state: &mut LayoutState, graph: &ForceGraph) -> StepReport {
    let params = state.params;
    let pos: Vec<Point> = graph
        .ids
        .iter()
        .map(|id| {
            *state
                .positions
                .entry(id.clone())
                .or_insert_with(|| seeded_position(params.seed, id, params.radius / 2.0))
        })
        .collect();

    let mut updates = Vec::new();
    let mut terms = Terms::default();
    let mut max_displacement: f64 = 0.0;
    for (i, id) in graph.ids.iter().enumerate() {
        if state.pinned.contains(id) {
            continue;
        }
        let force = net_force(graph, &pos, i, &params, &mut terms);
        let prev = state.prev_force.get(id).copied().unwrap_or_default();
        let swing = (force - prev).norm();
        let mut step = force * (params.speed_factor / (graph.mass[i] * (1.0 + swing.sqrt())));
        let len = step.norm();
        if len > params.max_step {
            step = step * (params.max_step / len);
        }
        max_displacement = max_displacement.max(step.norm());
        updates.push((id, pos[i] + step, force));
    }
    for (id, p, f) in updates {
        state.positions.insert(id.clone(), p);
        state.prev_force.insert(id.clone(), f);
    }
    state.iteration += 1;
    StepReport { max_displacement }
}

/// One synchronous iteration. Pinned nodes never move.
pub fn fa2_step(state: &mut LayoutState, view: &SubgraphView) -> StepReport {
    fa2_step_compiled(state, &ForceGraph::new(view))
}

/// Iterates until the largest free-node displacement drops below `epsilon`
/// or `max_iter` iterations have run.
pub fn run_layout(state: &mut LayoutState, view: &SubgraphView, max_iter: u64, epsilon: f64) -> RunReport {
    run_layout_compiled(state, &ForceGraph::new(view), max_iter, epsilon)
}

pub fn run_layout_compiled(state: &mut LayoutState, graph: &ForceGraph, max_iter: u64, epsilon: f64) -> RunReport {
    let mut report = RunReport {
        iterations: 0,
        converged: false,
        max_displacement: 0.0,
    };
    while report.iterations < max_iter {
        let step = fa2_step_compiled(state, graph);
        report.iterations += 1;
        report.max_displacement = step.max_displacement;
        if step.max_displacement < epsilon {
            report.converged = true;
            break;
        }
    }
    report
}

/// Moves a pinned node. Free nodes are owned by the simulation and cannot be moved.
pub fn move_pinned(state: &mut LayoutState, node_id: &str, to: Point) -> Result<(), LayoutError> {
    if !state.positions.contains_key(node_id) {
        return Err(LayoutError::UnknownNode(node_id.to_string()));
    }
    if !state.pinned.contains(node_id) {
        return Err(LayoutError::Validation(format!(
            "node `{node_id}` is not pinned and cannot be moved"
        )));
    }
    if !(to.x.is_finite() && to.y.is_finite()) {
        return Err(LayoutError::Validation("target position must be finite".into()));
    }
    state.positions.insert(node_id.to_string(), to);
    Ok(())
}
