//! HTTP front end for live game sessions.
//!
//! Sessions live in memory and are lost on restart; the response store is
//! the only durable state. Requests on one session are serialized by that
//! session's lock, appends by the store lock.

mod error;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use framing_core::analysis::Report;
use framing_core::bank::{bank, TaskId};
use framing_core::consequence::Effect;
use framing_core::session::{start_session, Choice, Demographics, SessionState};
use framing_core::store::{finalize_session, ResponseStore, StoreError, VersionFilter};
use framing_core::Version;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

pub use error::ApiError;

type Shared<T> = Arc<tokio::sync::Mutex<T>>;

pub struct AppState {
    sessions: Mutex<HashMap<String, Shared<SessionState>>>,
    assigned: AtomicU64,
    /// `None` when the store failed its startup check.
    store: Option<Mutex<Box<dyn ResponseStore>>>,
}

impl AppState {
    pub fn new(store: Box<dyn ResponseStore>) -> Self {
        AppState {
            sessions: Mutex::default(),
            assigned: AtomicU64::new(0),
            store: Some(Mutex::new(store)),
        }
    }

    /// A service that refuses new sessions because nothing could be saved.
    pub fn without_store() -> Self {
        AppState {
            sessions: Mutex::default(),
            assigned: AtomicU64::new(0),
            store: None,
        }
    }

    fn session(&self, id: &str) -> Result<Shared<SessionState>, ApiError> {
        self.sessions
            .lock()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown session {id}")))
    }

    fn store(&self) -> Result<&Mutex<Box<dyn ResponseStore>>, ApiError> {
        self.store.as_ref().ok_or_else(|| {
            StoreError::Unavailable("response store failed its startup check".into()).into()
        })
    }

    /// Saves a complete, unsaved session. Safe to call on every request.
    fn finalize(&self, s: &mut SessionState) -> Result<(), ApiError> {
        if !s.is_complete() || s.finalized {
            return Ok(());
        }
        let mut store = self.store()?.lock().expect("store lock poisoned");
        finalize_session(store.as_mut(), s, Utc::now())?;
        tracing::info!(session = %s.session_id, "session finalized");
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct StateView {
    pub session_id: String,
    pub version: u8,
    pub health: u16,
    pub health_display: String,
    pub gold_display: String,
    pub bonus_display: Option<String>,
    pub gate_open: bool,
    pub solved: Vec<bool>,
    pub solved_count: usize,
    pub finalized: bool,
}

impl From<&SessionState> for StateView {
    fn from(s: &SessionState) -> Self {
        StateView {
            session_id: s.session_id.to_string(),
            version: s.version.number(),
            health: s.player.health,
            health_display: s.player.health_display(),
            gold_display: s.player.gold_display(),
            bonus_display: s.player.bonus_display.clone(),
            gate_open: s.gate_open,
            solved: s.solved.to_vec(),
            solved_count: s.solved_count(),
            finalized: s.finalized,
        }
    }
}

fn available(s: &SessionState) -> Vec<u8> {
    s.available_tasks().into_iter().map(TaskId::get).collect()
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.body_text()))
}

fn task(n: u8) -> Result<TaskId, ApiError> {
    TaskId::new(n).map_err(|e| ApiError::not_found(e.to_string()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub gender: Option<String>,
    #[serde(default)]
    pub age: Option<i64>,
    #[serde(default)]
    pub education: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Created {
    pub session_id: String,
    pub version: u8,
    pub state: StateView,
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    payload: Result<Json<CreateSession>, JsonRejection>,
) -> Result<Json<Created>, ApiError> {
    let req = body(payload)?;
    app.store()?;
    let demographics = Demographics::new(
        req.gender.unwrap_or_default(),
        req.age,
        req.education.unwrap_or_default(),
    )?;
    let n = app.assigned.fetch_add(1, Ordering::SeqCst);
    let version = if n % 2 == 0 { Version::V1 } else { Version::V2 };
    let state = start_session(demographics, version)?;
    let id = state.session_id.to_string();
    let created = Created {
        session_id: id.clone(),
        version: version.number(),
        state: StateView::from(&state),
    };
    app.sessions
        .lock()
        .expect("session map poisoned")
        .insert(id, Arc::new(tokio::sync::Mutex::new(state)));
    Ok(Json(created))
}

#[derive(Debug, Serialize)]
pub struct SessionView {
    pub state: StateView,
    pub available_tasks: Vec<u8>,
}

async fn get_session(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let session = app.session(&id)?;
    let mut s = session.lock().await;
    if let Err(e) = app.finalize(&mut s) {
        tracing::warn!(session = %id, error = %e.message, "finalization retry failed");
    }
    Ok(Json(SessionView {
        state: StateView::from(&*s),
        available_tasks: available(&s),
    }))
}

async fn get_question(
    State(app): State<Arc<AppState>>,
    Path((id, n)): Path<(String, u8)>,
) -> Result<Json<framing_core::bank::DialogueScript>, ApiError> {
    let session = app.session(&id)?;
    let task = task(n)?;
    let s = session.lock().await;
    s.check_open(task)?;
    Ok(Json(bank().get(task).script(s.frame(task)).clone()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRequest {
    pub choice: i64,
    #[serde(default)]
    pub response_time_ms: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct AnswerResponse {
    pub continuation: String,
    pub effects: Vec<Effect>,
    pub alert_text: String,
    pub state: StateView,
}

async fn answer(
    State(app): State<Arc<AppState>>,
    Path((id, n)): Path<(String, u8)>,
    payload: Result<Json<AnswerRequest>, JsonRejection>,
) -> Result<Json<AnswerResponse>, ApiError> {
    let session = app.session(&id)?;
    let task = task(n)?;
    let req = body(payload)?;
    let mut s = session.lock().await;
    // a save that failed earlier is retried before anything else
    app.finalize(&mut s)?;
    s.check_open(task)?;
    let choice = Choice::from_number(req.choice)?;
    let transition = s.submit_answer(task, choice, req.response_time_ms)?;
    app.finalize(&mut s)?;
    Ok(Json(AnswerResponse {
        continuation: transition.continuation,
        effects: transition.bundle.effects,
        alert_text: transition.bundle.alert_text,
        state: StateView::from(&*s),
    }))
}

#[derive(Debug, Serialize)]
pub struct Finalized {
    pub record_id: String,
    pub state: StateView,
}

async fn finalize(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<Finalized>, ApiError> {
    let session = app.session(&id)?;
    let mut s = session.lock().await;
    let record_id = {
        let mut store = app.store()?.lock().expect("store lock poisoned");
        finalize_session(store.as_mut(), &mut s, Utc::now())?
    };
    Ok(Json(Finalized {
        record_id,
        state: StateView::from(&*s),
    }))
}

async fn summary(State(app): State<Arc<AppState>>) -> Result<Json<Report>, ApiError> {
    let records = app
        .store()?
        .lock()
        .expect("store lock poisoned")
        .load(VersionFilter::All)?;
    let (v1, v2): (Vec<_>, Vec<_>) = records.into_iter().partition(|r| r.version == 1);
    Ok(Json(Report::build(&v1, &v2)?))
}

pub fn router(app: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/questions/{n}", get(get_question))
        .route("/sessions/{id}/questions/{n}/answer", post(answer))
        .route("/sessions/{id}/finalize", post(finalize))
        .route("/analysis/summary", get(summary));
    let router = Router::new().nest("/api/v1", api).with_state(app);
    match static_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router,
    }
}
