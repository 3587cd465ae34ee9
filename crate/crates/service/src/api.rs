//! `/v1/` HTTP routes.

use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post, put};
use axum::{Json, Router};
use dronecine_core::project::load_project;
use dronecine_protocol::{
    ActorDraft, ActorPatch, Clock, ControlRequest, CreateSessionRequest, DroneDraft, DronePatch, EnvironmentPatch,
    ExportQuery, FreeplayEnter, FreeplayExit, OverlapRequest, RunRequest, RunState, ScanDraft, SessionInfo,
    ShotRequest, StepRequest, StepResponse, WaypointsUpdate,
};
use serde::Serialize;
use uuid::Uuid;

use crate::error::ApiError;
use crate::extract::{ApiJson, ApiPath, ApiQuery, OptionalJson};
use crate::model::SessionModel;
use crate::session::{Session, SessionHandle};
use crate::stream::stream_handler;
use crate::AppState;

type ApiResult<T> = Result<T, ApiError>;

pub fn routes() -> Router<AppState> {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(session_info).delete(delete_session))
        .route("/sessions/{id}/project", get(save_project).put(load_project_doc))
        .route("/sessions/{id}/environment", patch(update_environment))
        .route("/sessions/{id}/actors", post(add_actor))
        .route(
            "/sessions/{id}/actors/{actor_id}",
            patch(update_actor).delete(delete_actor),
        )
        .route("/sessions/{id}/drones", post(add_drone))
        .route(
            "/sessions/{id}/drones/{drone_id}",
            patch(update_drone).delete(delete_drone),
        )
        .route("/sessions/{id}/drones/{drone_id}/waypoints", put(set_waypoints))
        .route("/sessions/{id}/drones/{drone_id}/shot", post(generate_shot))
        .route("/sessions/{id}/scans", post(add_scan))
        .route("/sessions/{id}/scans/{scan_id}", axum::routing::delete(delete_scan))
        .route("/sessions/{id}/scans/{scan_id}/plan", post(generate_scan))
        .route("/sessions/{id}/scans/{scan_id}/overlap", post(verify_overlap))
        .route("/sessions/{id}/sim/start", post(sim_start))
        .route("/sessions/{id}/sim/pause", post(sim_pause))
        .route("/sessions/{id}/sim/reset", post(sim_reset))
        .route("/sessions/{id}/sim/step", post(sim_step))
        .route("/sessions/{id}/sim/run", post(sim_run))
        .route("/sessions/{id}/sim/state", get(sim_state))
        .route("/sessions/{id}/freeplay/enter", post(freeplay_enter))
        .route("/sessions/{id}/freeplay/exit", post(freeplay_exit))
        .route("/sessions/{id}/freeplay/control", post(freeplay_control))
        .route("/sessions/{id}/export", get(export))
        .route("/sessions/{id}/stream", get(stream_handler))
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    version: &'static str,
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok",
        version: env!("CARGO_PKG_VERSION"),
    })
}

/// Runs `f` on the locked session.
async fn with_session<R>(state: &AppState, id: Uuid, f: impl FnOnce(&mut Session) -> ApiResult<R>) -> ApiResult<R> {
    let handle = state.sessions.get(id).await?;
    let mut session = handle.lock().await;
    f(&mut session)
}

/// Runs a run-state transition and brings the clock and streams in line.
async fn transition<R>(
    state: &AppState,
    id: Uuid,
    f: impl FnOnce(&mut SessionModel) -> ApiResult<R>,
) -> ApiResult<(R, SessionInfo)> {
    let handle: SessionHandle = state.sessions.get(id).await?;
    let mut session = handle.lock().await;
    let before = session.model.run_state();
    let out = f(&mut session.model)?;
    let after = session.model.run_state();
    if after == RunState::Editing && before != RunState::Editing {
        session.close_streams(match before {
            RunState::Freeplay => "free play ended",
            _ => "simulation reset",
        });
    }
    session.sync_clock(&handle);
    Ok((out, session.model.info()))
}

async fn create_session(
    State(state): State<AppState>,
    OptionalJson(req): OptionalJson<CreateSessionRequest>,
) -> ApiResult<(StatusCode, Json<SessionInfo>)> {
    let model = SessionModel::new(Uuid::new_v4(), req.project.unwrap_or_default(), req.clock)?;
    let info = model.info();
    state.sessions.insert(model).await;
    tracing::info!(session = %info.id, "session created");
    Ok((StatusCode::CREATED, Json(info)))
}

async fn list_sessions(State(state): State<AppState>) -> Json<Vec<Uuid>> {
    Json(state.sessions.ids().await)
}

async fn session_info(State(state): State<AppState>, ApiPath(id): ApiPath<Uuid>) -> ApiResult<Json<SessionInfo>> {
    with_session(&state, id, |s| Ok(Json(s.model.info()))).await
}

async fn delete_session(State(state): State<AppState>, ApiPath(id): ApiPath<Uuid>) -> ApiResult<StatusCode> {
    let handle = state.sessions.remove(id).await?;
    handle.lock().await.close_streams("session deleted");
    Ok(StatusCode::NO_CONTENT)
}

async fn save_project(State(state): State<AppState>, ApiPath(id): ApiPath<Uuid>) -> ApiResult<Response> {
    let bytes = with_session(&state, id, |s| {
        Ok(dronecine_core::project::save_project(s.model.project())?)
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], bytes).into_response())
}

async fn load_project_doc(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<Uuid>,
    body: axum::body::Bytes,
) -> ApiResult<StatusCode> {
    let project = load_project(&body)?;
    with_session(&state, id, |s| s.model.replace_project(project)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn update_environment(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<Uuid>,
    ApiJson(patch): ApiJson<EnvironmentPatch>,
) -> ApiResult<StatusCode> {
    with_session(&state, id, |s| s.model.update_environment(patch)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn add_actor(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<Uuid>,
    ApiJson(draft): ApiJson<ActorDraft>,
) -> ApiResult<impl IntoResponse> {
    let actor = with_session(&state, id, |s| s.model.add_actor(draft)).await?;
    Ok((StatusCode::CREATED, Json(actor)))
}

async fn update_actor(
    State(state): State<AppState>,
    ApiPath((id, actor_id)): ApiPath<(Uuid, u32)>,
    ApiJson(patch): ApiJson<ActorPatch>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(
        with_session(&state, id, |s| s.model.update_actor(actor_id, patch)).await?,
    ))
}

async fn delete_actor(
    State(state): State<AppState>,
    ApiPath((id, actor_id)): ApiPath<(Uuid, u32)>,
) -> ApiResult<StatusCode> {
    with_session(&state, id, |s| s.model.delete_actor(actor_id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn add_drone(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<Uuid>,
    ApiJson(draft): ApiJson<DroneDraft>,
) -> ApiResult<impl IntoResponse> {
    let drone = with_session(&state, id, |s| s.model.add_drone(draft)).await?;
    Ok((StatusCode::CREATED, Json(drone)))
}

async fn update_drone(
    State(state): State<AppState>,
    ApiPath((id, drone_id)): ApiPath<(Uuid, u32)>,
    ApiJson(patch): ApiJson<DronePatch>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(
        with_session(&state, id, |s| s.model.update_drone(drone_id, patch)).await?,
    ))
}

async fn delete_drone(
    State(state): State<AppState>,
    ApiPath((id, drone_id)): ApiPath<(Uuid, u32)>,
) -> ApiResult<StatusCode> {
    with_session(&state, id, |s| s.model.delete_drone(drone_id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn set_waypoints(
    State(state): State<AppState>,
    ApiPath((id, drone_id)): ApiPath<(Uuid, u32)>,
    ApiJson(update): ApiJson<WaypointsUpdate>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(
        with_session(&state, id, |s| s.model.set_waypoints(drone_id, update.waypoints)).await?,
    ))
}

async fn generate_shot(
    State(state): State<AppState>,
    ApiPath((id, drone_id)): ApiPath<(Uuid, u32)>,
    OptionalJson(req): OptionalJson<ShotRequest>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(
        with_session(&state, id, |s| s.model.generate_shot(drone_id, req.dt)).await?,
    ))
}

async fn add_scan(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<Uuid>,
    ApiJson(draft): ApiJson<ScanDraft>,
) -> ApiResult<impl IntoResponse> {
    let scan = with_session(&state, id, |s| s.model.add_scan(draft)).await?;
    Ok((StatusCode::CREATED, Json(scan)))
}

async fn delete_scan(
    State(state): State<AppState>,
    ApiPath((id, scan_id)): ApiPath<(Uuid, u32)>,
) -> ApiResult<StatusCode> {
    with_session(&state, id, |s| s.model.delete_scan(scan_id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn generate_scan(
    State(state): State<AppState>,
    ApiPath((id, scan_id)): ApiPath<(Uuid, u32)>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(
        with_session(&state, id, |s| s.model.generate_scan(scan_id)).await?,
    ))
}

async fn verify_overlap(
    State(state): State<AppState>,
    ApiPath((id, scan_id)): ApiPath<(Uuid, u32)>,
    OptionalJson(req): OptionalJson<OverlapRequest>,
) -> ApiResult<impl IntoResponse> {
    Ok(Json(
        with_session(&state, id, |s| s.model.verify_overlap(scan_id, req.mode)).await?,
    ))
}

async fn sim_start(State(state): State<AppState>, ApiPath(id): ApiPath<Uuid>) -> ApiResult<Json<SessionInfo>> {
    Ok(Json(transition(&state, id, SessionModel::start).await?.1))
}

async fn sim_pause(State(state): State<AppState>, ApiPath(id): ApiPath<Uuid>) -> ApiResult<Json<SessionInfo>> {
    Ok(Json(transition(&state, id, SessionModel::pause).await?.1))
}

async fn sim_reset(State(state): State<AppState>, ApiPath(id): ApiPath<Uuid>) -> ApiResult<Json<SessionInfo>> {
    Ok(Json(transition(&state, id, SessionModel::reset).await?.1))
}

/// Explicit stepping. Allowed when paused, or when live on a manual clock.
pub(crate) fn step_session(session: &mut Session, ticks: u64) -> ApiResult<StepResponse> {
    let model = &session.model;
    let allowed = match model.run_state() {
        RunState::Paused => true,
        RunState::Running | RunState::Freeplay => model.clock() == Clock::Manual,
        RunState::Editing => false,
    };
    if !allowed {
        return Err(ApiError::conflict(match model.run_state() {
            RunState::Editing => "cannot step while editing; start the simulation first",
            _ => "the session runs on the realtime clock; pause it to single-step",
        }));
    }
    match session.step(ticks)? {
        Some(out) => Ok(StepResponse {
            state: out.state,
            events: out.events,
        }),
        None => Ok(StepResponse {
            state: session.model.snapshot().expect("world exists outside editing"),
            events: Vec::new(),
        }),
    }
}

async fn sim_step(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<Uuid>,
    ApiJson(req): ApiJson<StepRequest>,
) -> ApiResult<Json<StepResponse>> {
    Ok(Json(with_session(&state, id, |s| step_session(s, req.ticks)).await?))
}

async fn sim_run(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<Uuid>,
    ApiJson(req): ApiJson<RunRequest>,
) -> ApiResult<impl IntoResponse> {
    // Clone out of the lock so long headless runs do not block the session.
    let model = with_session(&state, id, |s| Ok(s.model.clone())).await?;
    let summary = tokio::task::spawn_blocking(move || model.run_headless(req.seconds))
        .await
        .map_err(|e| ApiError::new(dronecine_protocol::ErrorCode::Internal, None, e.to_string()))??;
    Ok(Json(summary))
}

async fn sim_state(State(state): State<AppState>, ApiPath(id): ApiPath<Uuid>) -> ApiResult<impl IntoResponse> {
    let snap = with_session(&state, id, |s| {
        s.model
            .snapshot()
            .ok_or_else(|| ApiError::conflict("no simulation is running"))
    })
    .await?;
    Ok(Json(snap))
}

async fn freeplay_enter(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<Uuid>,
    ApiJson(req): ApiJson<FreeplayEnter>,
) -> ApiResult<Json<SessionInfo>> {
    Ok(Json(
        transition(&state, id, |m| m.enter_freeplay(req.drone_id)).await?.1,
    ))
}

async fn freeplay_exit(State(state): State<AppState>, ApiPath(id): ApiPath<Uuid>) -> ApiResult<Json<FreeplayExit>> {
    let (recorded_path, _) = transition(&state, id, SessionModel::exit_freeplay).await?;
    Ok(Json(FreeplayExit { recorded_path }))
}

async fn freeplay_control(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<Uuid>,
    ApiJson(req): ApiJson<ControlRequest>,
) -> ApiResult<StatusCode> {
    with_session(&state, id, |s| s.model.control(req.drone_id, req.input)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn export(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<Uuid>,
    ApiQuery(query): ApiQuery<ExportQuery>,
) -> ApiResult<Response> {
    let bytes = with_session(&state, id, |s| s.model.export(&query)).await?;
    let disposition = format!("attachment; filename=\"export.{}\"", query.format.extension());
    Ok((
        [
            (header::CONTENT_TYPE, query.format.content_type().to_string()),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        bytes,
    )
        .into_response())
}
