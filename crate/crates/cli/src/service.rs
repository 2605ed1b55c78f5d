//! HTTP review service over a loaded [`Session`]: queue paging, concordance,
//! progress, decision submission and re-lemmatization.

use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use freqlex_core::kwic::{KwicLine, DEFAULT_WIDTH};
use freqlex_core::lemmatizer::AmbiguityItem;
use freqlex_core::lexicon::{Candidate, Decision, DecisionOutcome, DecisionScope, LexiconError, OccurrenceRef, Pos};
use freqlex_core::pipeline::{PipelineError, Progress, Session};

pub type SharedSession = Arc<RwLock<Session>>;

const DEFAULT_LIMIT: usize = 50;

pub fn router(session: SharedSession) -> Router {
    Router::new()
        .route("/api/queue", get(queue))
        .route("/api/kwic", get(kwic))
        .route("/api/progress", get(progress))
        .route("/api/decision", post(decision))
        .route("/api/rerun", post(rerun))
        .with_state(session)
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let status = match &e {
            PipelineError::Lexicon(LexiconError::OccurrenceNotFound(_)) => StatusCode::NOT_FOUND,
            PipelineError::Lexicon(LexiconError::InvalidDecision(_) | LexiconError::InvalidField(_)) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

#[derive(Debug, Deserialize)]
pub struct QueueParams {
    #[serde(default)]
    pub offset: usize,
    pub limit: Option<usize>,
    /// Only items for this form key.
    pub form: Option<String>,
    /// Only items whose form the lexicon does not know.
    #[serde(default)]
    pub unknown_only: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueuePage {
    pub total: usize,
    pub offset: usize,
    pub items: Vec<AmbiguityItem>,
}

async fn queue(State(s): State<SharedSession>, Query(p): Query<QueueParams>) -> Json<QueuePage> {
    let s = s.read();
    let matching: Vec<&AmbiguityItem> = s
        .output
        .queue
        .iter()
        .filter(|i| p.form.as_ref().is_none_or(|f| &i.form_key == f))
        .filter(|i| !p.unknown_only || i.candidates.is_empty())
        .collect();
    let items = matching
        .iter()
        .skip(p.offset)
        .take(p.limit.unwrap_or(DEFAULT_LIMIT))
        .map(|i| (*i).clone())
        .collect();
    Json(QueuePage {
        total: matching.len(),
        offset: p.offset,
        items,
    })
}

#[derive(Debug, Deserialize)]
pub struct KwicParams {
    pub form: String,
    pub width: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct KwicResponse {
    pub form: String,
    pub width: usize,
    pub lines: Vec<KwicLine>,
}

async fn kwic(State(s): State<SharedSession>, Query(p): Query<KwicParams>) -> Json<KwicResponse> {
    let width = p.width.unwrap_or(DEFAULT_WIDTH);
    let lines = s.read().kwic(&p.form, width);
    Json(KwicResponse {
        form: p.form,
        width,
        lines,
    })
}

async fn progress(State(s): State<SharedSession>) -> Json<Progress> {
    Json(s.read().progress())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub form_key: String,
    pub scope: DecisionScope,
    pub occurrence: Option<OccurrenceRef>,
    pub lemma: String,
    pub pos: Pos,
    pub disambiguator: Option<String>,
    pub language: Option<String>,
    pub annotator: String,
}

impl DecisionRequest {
    fn into_decision(self) -> Decision {
        let chosen = Candidate {
            lemma: self.lemma,
            pos: self.pos,
            disambiguator: self.disambiguator.filter(|d| !d.is_empty()),
            language: self.language.filter(|l| !l.is_empty()),
        };
        let mut d = Decision::global(self.form_key, chosen, self.annotator);
        d.scope = self.scope;
        d.occurrence = self.occurrence;
        d
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DecisionResponse {
    pub applied: bool,
    pub progress: Progress,
}

async fn decision(
    State(s): State<SharedSession>,
    Json(req): Json<DecisionRequest>,
) -> Result<Json<DecisionResponse>, ApiError> {
    let mut s = s.write();
    let outcome = s.record(req.into_decision())?;
    Ok(Json(DecisionResponse {
        applied: outcome == DecisionOutcome::Applied,
        progress: s.progress(),
    }))
}

async fn rerun(State(s): State<SharedSession>) -> Json<Progress> {
    let mut s = s.write();
    s.rerun();
    Json(s.progress())
}
