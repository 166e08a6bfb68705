//! Local HTTP interface over a [`LexiconStore`], used by the browser
//! workbench. All bodies are JSON.
//!
//! | route | purpose |
//! |---|---|
//! | `GET /entries/{orth}` | entries for a headword across lexicons |
//! | `GET /entries/{orth}/{pos}` | same, one part of speech |
//! | `PUT /entries` | save one entry with optimistic versioning |
//! | `POST /validate` | parse and validate entry text without saving |
//! | `GET /frames`, `GET /frames/{name}` | frame definitions |
//! | `GET /kwic?forms=&window=&limit=` | concordance lines |
//! | `POST /instances` | append tagged instances to an instance store |
//! | `GET /reports/coverage?mode=` | coverage of every lexicon against gold |
//! | `GET /reports/agreement?a=&b=` | agreement between two instance stores |

use std::path::Path;
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use comlex::corpus::{CorpusError, CorpusIndex, KwicLine};
use comlex::eval::{agreement, coverage, read_instances, AgreementReport, CoverageMode, CoverageReport, EvalError, TaggedInstance};
use comlex::lexicon::{
    entry_from_sexpr, frame_to_sexpr, has_errors, validate_entry, Diagnostic, Frame, LexiconError, ParseMode,
    PartOfSpeech,
};
use comlex::sexpr::parse_sexprs;
use comlex::store::{LexiconStore, StoreError, StoredEntry};
use comlex::Entry;

pub const DEFAULT_LEXICON: &str = "main";
pub const DEFAULT_GOLD: &str = "gold";
const DEFAULT_WINDOW: usize = 40;
const DEFAULT_LIMIT: usize = 50;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<LexiconStore>,
    pub corpus: Option<Arc<CorpusIndex>>,
}

impl AppState {
    pub fn new(store: LexiconStore, corpus: Option<CorpusIndex>) -> Self {
        AppState {
            store: Arc::new(store),
            corpus: corpus.map(Arc::new),
        }
    }

    /// Opens the store at `root`. A `corpus/` subdirectory, when present, is
    /// indexed with its cache kept at `corpus.idx`.
    pub fn open(root: &Path) -> Result<Self, ServiceSetupError> {
        let config = comlex::store::StoreConfig::from_root(root)?;
        let store = LexiconStore::open(root, config)?;
        let dir = root.join("corpus");
        let corpus = if dir.is_dir() {
            Some(CorpusIndex::from_dir_cached(&dir, &root.join("corpus.idx"))?)
        } else {
            None
        };
        Ok(AppState::new(store, corpus))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceSetupError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/entries", axum::routing::put(put_entry))
        .route("/entries/{orth}", get(get_entries))
        .route("/entries/{orth}/{pos}", get(get_entries_pos))
        .route("/validate", post(validate))
        .route("/frames", get(list_frames))
        .route("/frames/{name}", get(get_frame))
        .route("/kwic", get(kwic))
        .route("/instances", post(post_instances))
        .route("/reports/coverage", get(coverage_report))
        .route("/reports/agreement", get(agreement_report))
        .with_state(state)
}

/// Binds `addr` and serves until the process stops.
pub async fn serve(addr: std::net::SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl std::fmt::Display) -> Self {
        ApiError {
            status,
            body: json!({ "error": code, "message": message.to_string() }),
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.body[key] = value;
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::ValidationFailed(diags) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", "entry failed validation")
                .with("diagnostics", json!(diags)),
            StoreError::VersionConflict { expected, current } => ApiError::new(StatusCode::CONFLICT, "version-conflict", &e)
                .with("expected", json!(expected))
                .with("current", json!(current)),
            StoreError::BadName(_) | StoreError::BadInstance { .. } => ApiError::new(StatusCode::BAD_REQUEST, "bad-request", e),
            StoreError::Instances { .. } | StoreError::Lexicon { .. } | StoreError::Io { .. } => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "store", e)
            }
        }
    }
}

impl From<EvalError> for ApiError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Tsv { .. } => ApiError::new(StatusCode::BAD_REQUEST, "bad-request", e),
            _ => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "eval", e),
        }
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EntryView {
    pub lexicon: String,
    pub version: u64,
    pub pos: PartOfSpeech,
    pub orth: String,
    /// Canonical entry text.
    pub text: String,
}

impl From<StoredEntry> for EntryView {
    fn from(s: StoredEntry) -> Self {
        EntryView {
            text: s.entry.to_string(),
            pos: s.entry.pos,
            orth: s.entry.orth,
            lexicon: s.lexicon,
            version: s.version,
        }
    }
}

async fn get_entries(State(st): State<AppState>, UrlPath(orth): UrlPath<String>) -> Json<Vec<EntryView>> {
    Json(st.store.lookup(&orth, None).into_iter().map(EntryView::from).collect())
}

async fn get_entries_pos(
    State(st): State<AppState>,
    UrlPath((orth, pos)): UrlPath<(String, String)>,
) -> ApiResult<Vec<EntryView>> {
    let (pos, _) = PartOfSpeech::resolve(&pos.to_lowercase());
    let found: Vec<EntryView> = st.store.lookup(&orth, Some(&pos)).into_iter().map(EntryView::from).collect();
    if found.is_empty() {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "not-found", format!("no {pos} entry for `{orth}`")));
    }
    Ok(Json(found))
}

fn lexicon_error(e: LexiconError) -> ApiError {
    let err = ApiError::new(StatusCode::BAD_REQUEST, "parse", &e);
    match e.span() {
        Some(sp) => err.with("span", json!({ "start": sp.start, "end": sp.end })),
        None => err,
    }
}

/// Reads exactly one entry from `text`.
fn parse_single(text: &str) -> Result<(Entry, Vec<Diagnostic>), ApiError> {
    let forms = parse_sexprs(text).map_err(|e| lexicon_error(e.into()))?;
    match forms.as_slice() {
        [one] => entry_from_sexpr(one, ParseMode::Lenient).map_err(lexicon_error),
        _ => Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "parse",
            format!("expected one entry, found {}", forms.len()),
        )),
    }
}

#[derive(Debug, Deserialize)]
pub struct PutEntry {
    #[serde(default)]
    pub lexicon: Option<String>,
    pub text: String,
    /// Version last seen by the client; absent or 0 for a new entry.
    #[serde(default)]
    pub expected_version: Option<u64>,
    #[serde(default)]
    pub annotator: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Saved {
    pub lexicon: String,
    pub orth: String,
    pub pos: PartOfSpeech,
    pub version: u64,
    pub warnings: Vec<Diagnostic>,
}

async fn put_entry(State(st): State<AppState>, Json(req): Json<PutEntry>) -> ApiResult<Saved> {
    let (entry, mut warnings) = parse_single(&req.text)?;
    warnings.extend(validate_entry(&entry, &st.store.config().registry, &st.store.config().pdir));
    let lexicon = req.lexicon.unwrap_or_else(|| DEFAULT_LEXICON.to_string());
    let annotator = req.annotator.unwrap_or_else(|| "anonymous".to_string());
    let (orth, pos) = entry.key();
    let store = st.store.clone();
    let lex = lexicon.clone();
    // Saves hold the writer lock and fsync; keep them off the async workers.
    let version = tokio::task::spawn_blocking(move || store.save_entry(&lex, entry, req.expected_version, &annotator))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e))??;
    Ok(Json(Saved {
        lexicon,
        orth,
        pos,
        version,
        warnings,
    }))
}

#[derive(Debug, Deserialize)]
pub struct ValidateRequest {
    pub text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ValidateResponse {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
    /// Canonical text when the entry parsed.
    pub canonical: Option<String>,
}

async fn validate(State(st): State<AppState>, Json(req): Json<ValidateRequest>) -> ApiResult<ValidateResponse> {
    let (entry, mut diagnostics) = parse_single(&req.text)?;
    diagnostics.extend(validate_entry(&entry, &st.store.config().registry, &st.store.config().pdir));
    Ok(Json(ValidateResponse {
        ok: !has_errors(&diagnostics),
        diagnostics,
        canonical: Some(entry.to_string()),
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FrameView {
    pub kind: String,
    pub name: String,
    pub requires_pval: bool,
    pub examples: Vec<String>,
    pub text: String,
}

impl From<&Frame> for FrameView {
    fn from(f: &Frame) -> Self {
        FrameView {
            kind: f.kind.head().to_string(),
            name: f.name.clone(),
            requires_pval: f.requires_pval,
            examples: f.examples.clone(),
            text: frame_to_sexpr(f).to_string(),
        }
    }
}

async fn list_frames(State(st): State<AppState>) -> Json<Vec<FrameView>> {
    Json(st.store.config().registry.sorted().into_iter().map(FrameView::from).collect())
}

async fn get_frame(State(st): State<AppState>, UrlPath(name): UrlPath<String>) -> ApiResult<Vec<FrameView>> {
    let name = name.to_lowercase();
    let found: Vec<FrameView> = st.store.config().registry.by_name(&name).map(FrameView::from).collect();
    if found.is_empty() {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "not-found", format!("no frame `{name}`")));
    }
    Ok(Json(found))
}

#[derive(Debug, Deserialize)]
pub struct KwicQuery {
    /// Comma-separated surface forms.
    #[serde(default)]
    pub forms: String,
    pub window: Option<usize>,
    pub limit: Option<usize>,
}

async fn kwic(State(st): State<AppState>, Query(q): Query<KwicQuery>) -> ApiResult<Vec<KwicLine>> {
    let Some(corpus) = st.corpus.as_ref() else {
        return Err(ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no-corpus", "no corpus configured"));
    };
    let forms: Vec<&str> = q.forms.split(',').map(str::trim).filter(|f| !f.is_empty()).collect();
    corpus
        .kwic(&forms, q.window.unwrap_or(DEFAULT_WINDOW), q.limit.unwrap_or(DEFAULT_LIMIT))
        .map(Json)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad-request", e))
}

#[derive(Debug, Deserialize)]
pub struct PostInstances {
    #[serde(default)]
    pub store: Option<String>,
    #[serde(default)]
    pub instances: Vec<TaggedInstance>,
    /// Alternatively, a TSV document with header.
    #[serde(default)]
    pub tsv: Option<String>,
}

async fn post_instances(State(st): State<AppState>, Json(req): Json<PostInstances>) -> ApiResult<Value> {
    let mut instances = req.instances;
    if let Some(tsv) = &req.tsv {
        instances.extend(read_instances(tsv)?);
    }
    let name = req.store.unwrap_or_else(|| DEFAULT_GOLD.to_string());
    let store = st.store.clone();
    let n = tokio::task::spawn_blocking(move || store.append_instances(&name, instances))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e))??;
    Ok(Json(json!({ "appended": n })))
}

#[derive(Debug, Deserialize)]
pub struct CoverageQuery {
    pub mode: String,
    pub gold: Option<String>,
    #[serde(default)]
    pub exclude_flagged: bool,
}

async fn coverage_report(State(st): State<AppState>, Query(q): Query<CoverageQuery>) -> ApiResult<CoverageReport> {
    let mode: CoverageMode = q
        .mode
        .parse()
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad-request", e))?;
    let gold = st.store.instances(q.gold.as_deref().unwrap_or(DEFAULT_GOLD))?;
    let lexicons = st.store.lexicons();
    let report = coverage(&lexicons, &gold, mode, &st.store.config().pdir, !q.exclude_flagged)?;
    Ok(Json(report))
}

#[derive(Debug, Deserialize)]
pub struct AgreementQuery {
    pub a: String,
    pub b: String,
}

async fn agreement_report(State(st): State<AppState>, Query(q): Query<AgreementQuery>) -> ApiResult<AgreementReport> {
    let a = st.store.instances(&q.a)?;
    let b = st.store.instances(&q.b)?;
    Ok(Json(agreement(&a, &b)?))
}
