//! Time-varying multi-partite property graphs built from yearly tables.
//!
//! - [`ingest`]: CSV tables and a declarative column config to a [`PropertyGraph`].
//! - [`graphstore`]: the in-memory graph, subgraph queries, TSV exchange format.
//! - [`layout`]: closed-form initial placements and a pinned force simulation.
//! - [`dynamics`]: year-to-year transition diffs and degree time series.
//! - [`synth`]: synthetic datasets with planted trends.

pub mod dynamics;
pub mod graphstore;
pub mod ingest;
pub mod layout;
pub mod synth;

pub use dynamics::{degree_series, transition, DegreeSeries, MatchMode, TransitionDiff};
pub use graphstore::{
    EdgeRecord, GraphError, NodeKind, NodeRecord, PropertyGraph, RankedNode, SubgraphQuery,
    SubgraphView, Year,
};
pub use ingest::{build_graph, classify_columns, parse_table, IngestConfig, TableSnapshot};
pub use layout::{
    fa2_step, initial_layout, move_pinned, run_layout, InitialLayout, LayoutParams, LayoutState,
    Point,
};
pub use synth::SyntheticSpec;
