use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use yeargraph_core::layout::{move_pinned, run_layout_compiled};
use yeargraph_core::{degree_series, InitialLayout, LayoutParams, MatchMode, Point, SubgraphQuery, Year};

use crate::dataset::Dataset;
use crate::error::ApiError;
use crate::json::{Fixed6, JsonBody, QueryParams};
use crate::payload::*;
use crate::session::{lock_session, Session};
use crate::AppState;

/// Upper bound on iterations per step request.
pub const MAX_STEP_ITERATIONS: u64 = 10_000;
pub const DEFAULT_EPSILON: f64 = 0.01;

pub fn api_routes() -> Router<AppState> {
    Router::new()
        .route("/datasets", get(list_datasets))
        .route("/datasets/{id}/attributes", get(attributes))
        .route("/datasets/{id}/years", get(years))
        .route("/datasets/{id}/sessions", post(create_session))
        .route("/datasets/{id}/chart", get(chart))
        .route("/datasets/{id}/applicants/{aid}", get(applicant))
        .route("/sessions/{sid}/step", post(step))
        .route("/sessions/{sid}/move", post(move_node))
        .route("/sessions/{sid}/transition", post(transition))
        .fallback(unknown_route)
        .method_not_allowed_fallback(method_not_allowed)
}

pub async fn unknown_route() -> ApiError {
    ApiError::not_found("no such route")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed for this route")
}

fn dataset(state: &AppState, id: &str) -> Result<Arc<Dataset>, ApiError> {
    state
        .datasets
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("unknown dataset `{id}`")))
}

async fn list_datasets(State(state): State<AppState>) -> Json<Vec<DatasetSummary>> {
    Json(
        state
            .datasets
            .iter()
            .map(|d| DatasetSummary {
                id: d.id.clone(),
                years: d.graph.list_years(),
                applicants: d.graph.applicant_count(),
                attributes: d.graph.attribute_count(),
                edges: d.graph.edge_count(),
            })
            .collect(),
    )
}

async fn attributes(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Vec<AttributeType>>, ApiError> {
    let d = dataset(&state, &id)?;
    Ok(Json(
        d.graph
            .list_attribute_types()
            .into_iter()
            .map(|(attr_type, values)| AttributeType { attr_type, values })
            .collect(),
    ))
}

async fn years(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Vec<Year>>, ApiError> {
    Ok(Json(dataset(&state, &id)?.graph.list_years()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ParamsRequest {
    repulsion: Option<f64>,
    gravity: Option<f64>,
    speed_factor: Option<f64>,
    max_step: Option<f64>,
    radius: Option<f64>,
    linear_spacing: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSessionRequest {
    year: Year,
    x: String,
    y: String,
    limit: Option<usize>,
    offset: Option<usize>,
    #[serde(default = "default_layout")]
    layout: InitialLayout,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    params: ParamsRequest,
}

fn default_layout() -> InitialLayout {
    InitialLayout::Circular
}

fn session_payload(s: &Session) -> SessionPayload {
    SessionPayload {
        session_id: s.id.clone(),
        dataset: s.dataset.id.clone(),
        year: s.query.year,
        x: s.query.primary_type.clone(),
        y: s.query.secondary_type.clone(),
        limit: s.query.limit,
        offset: s.query.offset.unwrap_or(0),
        layout: s.layout.as_str(),
        seed: s.state.params.seed,
        iteration: s.state.iteration,
        nodes: nodes(&s.view, &s.state),
        edges: edges(&s.view),
    }
}

async fn create_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(req): JsonBody<CreateSessionRequest>,
) -> Result<(StatusCode, Json<SessionPayload>), ApiError> {
    let d = dataset(&state, &id)?;
    let defaults = LayoutParams::default();
    let p = req.params;
    let params = LayoutParams {
        repulsion: p.repulsion.unwrap_or(defaults.repulsion),
        gravity: p.gravity.unwrap_or(defaults.gravity),
        speed_factor: p.speed_factor.unwrap_or(defaults.speed_factor),
        max_step: p.max_step.unwrap_or(defaults.max_step),
        radius: p.radius.unwrap_or(defaults.radius),
        linear_spacing: p.linear_spacing.unwrap_or(defaults.linear_spacing),
        seed: req.seed,
    };
    let mut query = SubgraphQuery::new(req.year, req.x, req.y);
    query.limit = req.limit;
    query.offset = req.offset;
    let session = state
        .sessions
        .create(|sid| Session::create(sid, d, query, req.layout, params))?;
    let payload = session_payload(&lock_session(&session));
    Ok((StatusCode::CREATED, Json(payload)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepRequest {
    iterations: u64,
    epsilon: Option<f64>,
}

async fn step(
    State(state): State<AppState>,
    Path(sid): Path<String>,
    JsonBody(req): JsonBody<StepRequest>,
) -> Result<Json<StepPayload>, ApiError> {
    if req.iterations > MAX_STEP_ITERATIONS {
        return Err(ApiError::validation(format!(
            "iterations must be at most {MAX_STEP_ITERATIONS}"
        )));
    }
    let epsilon = req.epsilon.unwrap_or(DEFAULT_EPSILON);
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(ApiError::validation("epsilon must be a non-negative number"));
    }
    let session = state.sessions.get(&sid)?;
    let mut guard = lock_session(&session);
    let s = &mut *guard;
    let before = s.state.positions.clone();
    let report = run_layout_compiled(&mut s.state, &s.topology, req.iterations, epsilon);
    let changed = s
        .state
        .positions
        .iter()
        .filter(|(id, p)| before.get(*id).is_none_or(|b| !b.bits_eq(**p)))
        .map(|(id, p)| PositionPayload::new(id, *p))
        .collect();
    Ok(Json(StepPayload {
        session_id: sid,
        iteration: s.state.iteration,
        iterations: report.iterations,
        converged: report.converged,
        max_displacement: Fixed6(report.max_displacement),
        changed,
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveRequest {
    node_id: String,
    x: f64,
    y: f64,
}

async fn move_node(
    State(state): State<AppState>,
    Path(sid): Path<String>,
    JsonBody(req): JsonBody<MoveRequest>,
) -> Result<Json<MovePayload>, ApiError> {
    let session = state.sessions.get(&sid)?;
    let mut s = lock_session(&session);
    let to = Point::new(req.x, req.y);
    move_pinned(&mut s.state, &req.node_id, to)?;
    Ok(Json(MovePayload {
        session_id: sid,
        node_id: req.node_id,
        x: Fixed6(to.x),
        y: Fixed6(to.y),
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionRequest {
    to_year: Year,
    #[serde(default, rename = "match")]
    mode: MatchMode,
}

async fn transition(
    State(state): State<AppState>,
    Path(sid): Path<String>,
    JsonBody(req): JsonBody<TransitionRequest>,
) -> Result<Json<TransitionPayload>, ApiError> {
    let session = state.sessions.get(&sid)?;
    let mut s = lock_session(&session);
    let before = s.view.clone();
    let diff = s.transition(req.to_year, req.mode)?;
    Ok(Json(TransitionPayload::new(&sid, diff, &before, &s.view, &s.state)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartQuery {
    x: String,
    limit: Option<usize>,
    offset: Option<usize>,
}

async fn chart(
    State(state): State<AppState>,
    Path(id): Path<String>,
    QueryParams(q): QueryParams<ChartQuery>,
) -> Result<Json<ChartPayload>, ApiError> {
    let d = dataset(&state, &id)?;
    let g = &d.graph;
    if !g.has_attribute_type(&q.x) {
        return Err(ApiError::not_found(format!("unknown attribute type `{}`", q.x)));
    }
    let series = g
        .rank_attributes(&q.x, None)
        .into_iter()
        .skip(q.offset.unwrap_or(0))
        .take(q.limit.unwrap_or(usize::MAX))
        .map(|(node, _)| {
            let s = degree_series(&node.id, g)?;
            Ok(SeriesPayload {
                attribute_id: node.id.clone(),
                label: node.label.clone(),
                total: s.total(),
                points: s
                    .points
                    .iter()
                    .map(|&(year, degree)| SeriesPoint { year, degree })
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>, ApiError>>()?;
    Ok(Json(ChartPayload {
        dataset: d.id.clone(),
        x: q.x,
        years: g.list_years(),
        series,
    }))
}

async fn applicant(
    State(state): State<AppState>,
    Path((id, aid)): Path<(String, String)>,
) -> Result<Json<ApplicantPayload>, ApiError> {
    let d = dataset(&state, &id)?;
    let detail = d.graph.get_applicant(&aid)?;
    Ok(Json(ApplicantPayload {
        id: detail.applicant.id.clone(),
        year: detail.applicant.year,
        attributes: detail
            .attributes
            .into_iter()
            .map(|a| AttributeValue {
                attribute_id: a.id,
                attr_type: a.attr_type,
                value: a.label,
            })
            .collect(),
    }))
}
