use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::Next;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use serde_json::json;
use vistheme_core::refine::{
    measure_consistency, Action, ConsistencyReport, DegenerateResolution, Dispute, RefineStatus,
};

use crate::error::ApiError;
use crate::runs::{parse_session_id, Run};
use crate::AppState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Labeling,
    AwaitingAdjudication,
    Ready,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub sampled: usize,
    pub adjudicated: usize,
    pub disputed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub run_id: String,
    pub round: usize,
    pub status: SessionStatus,
    pub samples: BTreeMap<usize, Vec<String>>,
    pub coders: Vec<String>,
    pub progress: Progress,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LabelBody {
    pub coder_id: String,
    pub image_id: String,
    pub theme: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AdjudicationBody {
    pub image_id: String,
    pub theme: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineBody {
    #[serde(default)]
    pub resolutions: BTreeMap<usize, DegenerateResolution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub defined: bool,
    pub value: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyView {
    pub session_id: String,
    pub round: usize,
    /// Clusters sampled this round, measured over adjudicated labels.
    pub reports: Vec<ConsistencyReport>,
    /// Unchanged clusters whose earlier report still stands.
    pub carried: Vec<ConsistencyReport>,
    pub kappa: Kappa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterView {
    pub id: usize,
    pub parent: Option<usize>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineView {
    pub run_id: String,
    pub round: usize,
    pub status: RefineStatus,
    pub actions: Vec<Action>,
    pub average_consistency: f64,
    pub clusters: Vec<ClusterView>,
    pub next_session: Option<String>,
    pub final_average_consistency: Option<f64>,
    pub final_themes: Option<Vec<String>>,
}

pub async fn require_token(State(st): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    if let Some(token) = &st.token {
        let ok = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|t| t == token);
        if !ok {
            return ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong bearer token")
                .into_response();
        }
    }
    next.run(req).await
}

fn session_view(run: &Run) -> Result<SessionView, ApiError> {
    let cur = run.state.current().ok_or_else(|| ApiError::not_found("run has finished"))?;
    let sampled: usize = cur.samples.values().map(Vec::len).sum();
    let adjudicated = cur.samples.values().flatten().filter(|id| cur.labels.adjudicated(id).is_some()).count();
    let disputed = cur.labels.disputes().len();
    let status = if adjudicated == sampled {
        SessionStatus::Ready
    } else if adjudicated + disputed == sampled {
        SessionStatus::AwaitingAdjudication
    } else {
        SessionStatus::Labeling
    };
    Ok(SessionView {
        session_id: run.session_id(),
        run_id: run.id.clone(),
        round: cur.round,
        status,
        samples: cur.samples.clone(),
        coders: cur.labels.coders().to_vec(),
        progress: Progress { sampled, adjudicated, disputed },
    })
}

/// Run handle for an open session id.
async fn open_session(st: &AppState, id: &str) -> Result<crate::runs::RunHandle, ApiError> {
    let (run_id, round) = parse_session_id(id).ok_or_else(|| ApiError::not_found(format!("unknown session {id:?}")))?;
    let handle = st.registry.get(run_id)?;
    {
        let run = handle.lock().await;
        let open = run.state.current().is_some_and(|c| c.round == round && c.session_opened);
        if !open {
            return Err(ApiError::not_found(format!("unknown session {id:?}")));
        }
    }
    Ok(handle)
}

pub async fn create_session(
    State(st): State<Arc<AppState>>,
    Path(run_id): Path<String>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let handle = st.registry.get(&run_id)?;
    let mut run = handle.lock().await;
    let session_id = run.session_id();
    let Some(cur) = run.state.current_mut() else {
        return Err(ApiError::conflict("finished", "refinement has finished"));
    };
    if cur.session_opened {
        return Err(ApiError::conflict("session_exists", "a session is already open for this round")
            .with(json!({ "session_id": session_id })));
    }
    cur.session_opened = true;
    run.persist()?;
    Ok((StatusCode::CREATED, Json(session_view(&run)?)))
}

pub async fn get_session(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let handle = open_session(&st, &id).await?;
    let run = handle.lock().await;
    Ok(Json(session_view(&run)?))
}

pub async fn post_label(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<LabelBody>,
) -> Result<StatusCode, ApiError> {
    let handle = open_session(&st, &id).await?;
    let mut run = handle.lock().await;
    run.state.submit_label(&body.coder_id, &body.image_id, &body.theme)?;
    run.persist()?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn get_adjudications(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let handle = open_session(&st, &id).await?;
    let run = handle.lock().await;
    let items: Vec<Dispute> = run.state.disputes();
    Ok(Json(json!({ "session_id": id, "items": items })))
}

pub async fn post_adjudication(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<AdjudicationBody>,
) -> Result<StatusCode, ApiError> {
    let handle = open_session(&st, &id).await?;
    let mut run = handle.lock().await;
    run.state.adjudicate(&body.image_id, &body.theme)?;
    run.persist()?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn get_consistency(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<ConsistencyView>, ApiError> {
    let handle = open_session(&st, &id).await?;
    let run = handle.lock().await;
    let cur = run.state.current().expect("open session");
    let config = run.state.config();
    let mut reports = Vec::new();
    for (&cluster, ids) in &cur.samples {
        let themes = ids.iter().filter_map(|i| cur.labels.adjudicated(i));
        if let Ok(r) = measure_consistency(cluster, themes, config) {
            reports.push(r);
        }
    }
    let carried = run
        .state
        .clusters()
        .iter()
        .filter(|c| !cur.samples.contains_key(&c.id))
        .filter_map(|c| c.report.clone())
        .collect();
    let kappa = match cur.labels.kappa() {
        Some(k) => Kappa { defined: true, value: Some(k.kappa), n: k.n },
        None => Kappa { defined: false, value: None, n: 0 },
    };
    Ok(Json(ConsistencyView { session_id: id, round: cur.round, reports, carried, kappa }))
}

pub async fn refine(
    State(st): State<Arc<AppState>>,
    Path(run_id): Path<String>,
    body: Bytes,
) -> Result<Json<RefineView>, ApiError> {
    let body: RefineBody = if body.iter().all(u8::is_ascii_whitespace) {
        RefineBody::default()
    } else {
        serde_json::from_slice(&body)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body", e.to_string()))?
    };
    let handle = st.registry.get(&run_id)?;
    let mut guard = handle.lock().await;
    let run = &mut *guard;
    if let Some(cur) = run.state.current() {
        if !cur.session_opened {
            return Err(ApiError::conflict("not_ready", "no session has been opened for this round"));
        }
    }
    let round = run.state.round();
    let record = run.state.advance(&run.matrix, &body.resolutions)?.clone();
    run.persist()?;
    let status = run.state.status();
    let outcome = run.state.outcome();
    Ok(Json(RefineView {
        run_id: run.id.clone(),
        round,
        status,
        actions: record.actions,
        average_consistency: record.average_consistency,
        clusters: run
            .state
            .clusters()
            .iter()
            .map(|c| ClusterView { id: c.id, parent: c.parent, size: c.members.len() })
            .collect(),
        next_session: (!status.is_terminal()).then(|| run.session_id()),
        final_average_consistency: outcome.map(|o| o.average_consistency),
        final_themes: outcome.map(|o| (0..o.model.k()).map(|j| o.model.theme_name(j)).collect()),
    }))
}

pub async fn thumbnail(
    State(st): State<Arc<AppState>>,
    Path((id, image_id)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let handle = open_session(&st, &id).await?;
    let path = {
        let run = handle.lock().await;
        if run.state.sampled_cluster(&image_id).is_none() {
            return Err(ApiError::not_found(format!("image {image_id:?} is not in this session")));
        }
        let store = run.layout.corpus_store();
        let corpus = store.load().map_err(|e| ApiError::not_found(format!("no corpus for this run: {e}")))?;
        let record = corpus.image(&image_id).ok_or_else(|| ApiError::not_found("image not in corpus"))?;
        store.resolve_source(&record.source).map_err(|e| ApiError::internal(e.to_string()))?
    };
    let bytes = tokio::task::spawn_blocking(move || crate::thumbnail::thumbnail_jpeg(&path))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::not_found(format!("image unavailable: {e}")))?;
    Ok(([(header::CONTENT_TYPE, "image/jpeg")], bytes).into_response())
}
