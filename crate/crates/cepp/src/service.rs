//! HTTP cost service: modeling sessions that validate, price, propose and
//! apply rewrites.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cepp_core::ipcg::validate_ipcg;
use cepp_core::rewrite::{
    apply_rule, verify_rewrite, Proposal, ProposalAction, ProposalKind, RewriteError,
};
use cepp_core::workload::{flatten, WorkloadEntry};
use cepp_core::{fixtures, Catalog, Cents, Ipcg, PlacementItem};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;

use crate::formats::{self, eur, ipcg_from_doc, ipcg_to_doc, report_to_doc, FormatError, IpcgDoc, ReportDoc};
use crate::pricing::PricingContext;

#[derive(Clone, Debug, Default)]
pub struct ServiceConfig {
    pub catalog_dir: Option<PathBuf>,
    pub workload_dir: Option<PathBuf>,
    pub port: u16,
    pub seed: u64,
    pub session_dir: Option<PathBuf>,
}

impl ServiceConfig {
    /// Reads `CEPP_CATALOG_DIR`, `CEPP_WORKLOAD_DIR`, `CEPP_PORT` (default
    /// 8080), `CEPP_SEED` (default 0) and `CEPP_SESSION_DIR`.
    pub fn from_env() -> Result<Self, String> {
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        let port = match var("CEPP_PORT") {
            Some(p) => p.parse().map_err(|_| format!("CEPP_PORT `{p}` is not a port"))?,
            None => 8080,
        };
        let seed = match var("CEPP_SEED") {
            Some(s) => s.parse().map_err(|_| format!("CEPP_SEED `{s}` is not an integer"))?,
            None => 0,
        };
        Ok(ServiceConfig {
            catalog_dir: var("CEPP_CATALOG_DIR").map(PathBuf::from),
            workload_dir: var("CEPP_WORKLOAD_DIR").map(PathBuf::from),
            port,
            seed,
            session_dir: var("CEPP_SESSION_DIR").map(PathBuf::from),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HistoryEntry {
    pub revision: u64,
    pub action: String,
    pub proposal: Option<ProposalDoc>,
    pub cost_eur_mo: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposalDoc {
    pub id: String,
    pub rule: String,
    pub nodes_removed: i64,
    pub cost_before_eur: f64,
    pub cost_after_eur: f64,
    pub description: String,
    pub preview_graph_ids: Vec<String>,
}

struct Session {
    id: String,
    catalog_id: String,
    region: Option<String>,
    graph: Ipcg,
    revision: u64,
    cost: Option<Cents>,
    history: Vec<HistoryEntry>,
    /// Proposals enumerated at `revision`, if any.
    proposals: Option<(u64, Vec<Proposal>)>,
}

pub struct AppState {
    catalogs: BTreeMap<String, Catalog>,
    regions: BTreeMap<String, Vec<PlacementItem>>,
    seed: u64,
    session_dir: Option<PathBuf>,
    next_session: AtomicU64,
    sessions: Mutex<BTreeMap<String, Arc<Mutex<Session>>>>,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    File { path: String, source: FormatError },
    #[error("{0}")]
    Io(String),
    #[error("region `{region}`: {message}")]
    Region { region: String, message: String },
}

fn stem_before(path: &Path, suffix: &str) -> Option<String> {
    let name = path.file_name()?.to_str()?;
    name.strip_suffix(suffix).map(String::from)
}

fn sorted_files(dir: &Path, suffix: &str) -> Result<Vec<PathBuf>, LoadError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| LoadError::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| stem_before(p, suffix).is_some())
        .collect();
    files.sort();
    Ok(files)
}

impl AppState {
    /// Catalogs from `*.catalog.json` in the catalog dir (the bundled ones
    /// when unset); region workloads from `*.workload.json`.
    pub fn load(cfg: &ServiceConfig) -> Result<Self, LoadError> {
        let mut catalogs = BTreeMap::new();
        match &cfg.catalog_dir {
            None => {
                catalogs.insert("aws_t2".into(), fixtures::aws_t2_catalog());
                catalogs.insert("example1".into(), fixtures::example1_catalog());
            }
            Some(dir) => {
                for path in sorted_files(dir, ".catalog.json")? {
                    let c = formats::load_catalog(&path).map_err(|source| LoadError::File {
                        path: path.display().to_string(),
                        source,
                    })?;
                    catalogs.insert(stem_before(&path, ".catalog.json").unwrap(), c);
                }
            }
        }
        let mut regions = BTreeMap::new();
        if let Some(dir) = &cfg.workload_dir {
            for path in sorted_files(dir, ".workload.json")? {
                let w = formats::load_workload(&path).map_err(|source| LoadError::File {
                    path: path.display().to_string(),
                    source,
                })?;
                let name = w.region.clone().unwrap_or_else(|| stem_before(&path, ".workload.json").unwrap());
                let mut items = Vec::new();
                for (k, e) in w.entries.iter().enumerate() {
                    match e {
                        WorkloadEntry::Item(i) => items.push(i.clone()),
                        WorkloadEntry::Process(g) => items.push(
                            cepp_core::workload::process_item(format!("{name}/p{k}"), g).map_err(|e| {
                                LoadError::Region {
                                    region: name.clone(),
                                    message: e.to_string(),
                                }
                            })?,
                        ),
                    }
                }
                regions.insert(name, items);
            }
        }
        Ok(Self::new(catalogs, regions, cfg.seed, cfg.session_dir.clone()))
    }

    pub fn new(
        catalogs: BTreeMap<String, Catalog>,
        regions: BTreeMap<String, Vec<PlacementItem>>,
        seed: u64,
        session_dir: Option<PathBuf>,
    ) -> Self {
        AppState {
            catalogs,
            regions,
            seed,
            session_dir,
            next_session: AtomicU64::new(1),
            sessions: Mutex::new(BTreeMap::new()),
        }
    }

    fn pricing(&self, s: &Session) -> PricingContext {
        let background = s
            .region
            .as_ref()
            .and_then(|r| self.regions.get(r))
            .cloned()
            .unwrap_or_default();
        PricingContext::new(self.catalogs[&s.catalog_id].clone(), background, self.seed)
    }

    /// Builds every region's placement instance once so duplicate or empty
    /// items fail at startup.
    pub fn check_regions(&self) -> Result<(), LoadError> {
        let Some(catalog) = self.catalogs.values().next() else { return Ok(()) };
        for (name, items) in &self.regions {
            let w = cepp_core::workload::Workload {
                region: Some(name.clone()),
                entries: items.iter().cloned().map(WorkloadEntry::Item).collect(),
            };
            flatten(&w, catalog).map_err(|e| LoadError::Region {
                region: name.clone(),
                message: e.to_string(),
            })?;
        }
        Ok(())
    }
}

type Shared = Arc<AppState>;

fn error(status: StatusCode, code: &str, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": code, "message": message.into() }))).into_response()
}

fn not_found(what: &str) -> Response {
    error(StatusCode::NOT_FOUND, "NOT_FOUND", format!("{what} not found"))
}

#[allow(clippy::result_large_err)]
fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| {
        error(
            StatusCode::BAD_REQUEST,
            "PARSE_ERROR",
            format!("line {}, column {}: {e}", e.line(), e.column()),
        )
    })
}

#[allow(clippy::result_large_err)]
fn graph_from(doc: &IpcgDoc) -> Result<Ipcg, Response> {
    ipcg_from_doc(doc).map_err(|e| error(StatusCode::BAD_REQUEST, "PARSE_ERROR", e.to_string()))
}

fn proposal_doc(p: &Proposal, revision: u64) -> ProposalDoc {
    ProposalDoc {
        id: format!("r{revision}-{}", p.id),
        rule: p.kind.as_str().into(),
        nodes_removed: p.nodes_removed,
        cost_before_eur: eur(p.cost_before),
        cost_after_eur: eur(p.cost_after),
        description: p.description.clone(),
        preview_graph_ids: (0..p.preview.len()).map(|k| format!("r{revision}-{}/{k}", p.id)).collect(),
    }
}

impl Session {
    fn state_json(&self) -> Value {
        json!({
            "session_id": self.id,
            "catalog_id": self.catalog_id,
            "region": self.region,
            "revision": self.revision,
            "graph": ipcg_to_doc(&self.graph),
            "validation": report_to_doc(&validate_ipcg(&self.graph)),
            "cost_eur_mo": self.cost.map(eur),
            "history": self.history,
        })
    }
}

fn persist(state: &AppState, s: &Session) {
    if let Some(dir) = &state.session_dir {
        let _ = std::fs::create_dir_all(dir);
        let _ = std::fs::write(dir.join(format!("{}.json", s.id)), formats::to_json(&s.state_json()));
    }
}

async fn session(state: &AppState, id: &str) -> Option<Arc<Mutex<Session>>> {
    state.sessions.lock().await.get(id).cloned()
}

/// Service proposals exclude the cutting rules: a session holds one graph.
fn session_proposals(state: &AppState, s: &Session) -> Result<Vec<Proposal>, RewriteError> {
    let ctx = state.pricing(s);
    let mut props = cepp_core::rewrite::enumerate_proposals(&s.graph, &ctx)?;
    props.retain(|p| {
        matches!(
            p.kind,
            ProposalKind::CombineNeighbors | ProposalKind::RouterToRoutingSlip
        )
    });
    for (k, p) in props.iter_mut().enumerate() {
        p.id = format!("p{k}");
    }
    Ok(props)
}

fn price(state: &AppState, s: &Session) -> Option<Cents> {
    if !validate_ipcg(&s.graph).is_correct() {
        return None;
    }
    state.pricing(s).price_graphs(std::slice::from_ref(&s.graph)).ok()
}

#[derive(Deserialize)]
struct CreateSession {
    ipcg: IpcgDoc,
    catalog_id: String,
    #[serde(default)]
    region: Option<String>,
}

async fn create_session(State(state): State<Shared>, body: Bytes) -> Response {
    let req: CreateSession = match parse_body(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    if !state.catalogs.contains_key(&req.catalog_id) {
        return not_found(&format!("catalog `{}`", req.catalog_id));
    }
    if let Some(r) = &req.region {
        if !state.regions.contains_key(r) {
            return not_found(&format!("region `{r}`"));
        }
    }
    let graph = match graph_from(&req.ipcg) {
        Ok(g) => g,
        Err(resp) => return resp,
    };
    let id = format!("s{}", state.next_session.fetch_add(1, Ordering::SeqCst));
    let mut s = Session {
        id: id.clone(),
        catalog_id: req.catalog_id,
        region: req.region,
        graph,
        revision: 0,
        cost: None,
        history: Vec::new(),
        proposals: None,
    };
    let report = validate_ipcg(&s.graph);
    s.cost = price(&state, &s);
    s.history.push(HistoryEntry {
        revision: 0,
        action: "create".into(),
        proposal: None,
        cost_eur_mo: s.cost.map(eur),
    });
    persist(&state, &s);
    let status = if report.is_correct() { StatusCode::CREATED } else { StatusCode::UNPROCESSABLE_ENTITY };
    let body = json!({
        "session_id": id,
        "revision": 0,
        "validation": report_to_doc(&report),
        "cost_eur_mo": s.cost.map(eur),
    });
    state.sessions.lock().await.insert(id, Arc::new(Mutex::new(s)));
    (status, Json(body)).into_response()
}

async fn get_session(State(state): State<Shared>, UrlPath(id): UrlPath<String>) -> Response {
    let Some(s) = session(&state, &id).await else { return not_found("session") };
    let s = s.lock().await;
    Json(s.state_json()).into_response()
}

async fn ensure_proposals(state: &AppState, s: &mut Session) -> Result<(), Response> {
    if s.proposals.as_ref().is_some_and(|(rev, _)| *rev == s.revision) {
        return Ok(());
    }
    if !validate_ipcg(&s.graph).is_correct() {
        s.proposals = Some((s.revision, Vec::new()));
        return Ok(());
    }
    match session_proposals(state, s) {
        Ok(p) => {
            s.proposals = Some((s.revision, p));
            Ok(())
        }
        Err(RewriteError::Pricing(e)) => Err(error(StatusCode::UNPROCESSABLE_ENTITY, "PRICING_UNAVAILABLE", e.0)),
        Err(e) => Err(error(StatusCode::INTERNAL_SERVER_ERROR, "REWRITE_FAILED", e.to_string())),
    }
}

async fn list_proposals(State(state): State<Shared>, UrlPath(id): UrlPath<String>) -> Response {
    let Some(s) = session(&state, &id).await else { return not_found("session") };
    let mut s = s.lock().await;
    if let Err(resp) = ensure_proposals(&state, &mut s).await {
        return resp;
    }
    let (rev, props) = s.proposals.as_ref().unwrap();
    let docs: Vec<ProposalDoc> = props.iter().map(|p| proposal_doc(p, *rev)).collect();
    Json(docs).into_response()
}

/// Splits `r{revision}-{local}` into its parts.
fn split_proposal_id(pid: &str) -> Option<(u64, &str)> {
    let rest = pid.strip_prefix('r')?;
    let (rev, local) = rest.split_once('-')?;
    Some((rev.parse().ok()?, local))
}

async fn preview(State(state): State<Shared>, UrlPath((id, pid)): UrlPath<(String, String)>) -> Response {
    let Some(s) = session(&state, &id).await else { return not_found("session") };
    let mut s = s.lock().await;
    let Some((rev, local)) = split_proposal_id(&pid) else { return not_found("proposal") };
    if rev != s.revision {
        return error(StatusCode::CONFLICT, "STALE_PROPOSAL", "graph changed since enumeration");
    }
    if let Err(resp) = ensure_proposals(&state, &mut s).await {
        return resp;
    }
    let (_, props) = s.proposals.as_ref().unwrap();
    let Some(p) = props.iter().find(|p| p.id == local) else { return not_found("proposal") };
    let graphs: Vec<IpcgDoc> = p.preview.iter().map(ipcg_to_doc).collect();
    Json(json!({ "proposal_id": pid, "graphs": graphs })).into_response()
}

#[derive(Deserialize)]
struct ApplyRequest {
    proposal_id: String,
}

async fn apply(State(state): State<Shared>, UrlPath(id): UrlPath<String>, body: Bytes) -> Response {
    let req: ApplyRequest = match parse_body(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    let Some(s) = session(&state, &id).await else { return not_found("session") };
    let mut s = s.lock().await;
    let Some((rev, local)) = split_proposal_id(&req.proposal_id) else { return not_found("proposal") };
    if rev != s.revision {
        return error(StatusCode::CONFLICT, "STALE_PROPOSAL", "graph changed since enumeration");
    }
    if let Err(resp) = ensure_proposals(&state, &mut s).await {
        return resp;
    }
    let (_, props) = s.proposals.as_ref().unwrap();
    let Some(p) = props.iter().find(|p| p.id == local).cloned() else { return not_found("proposal") };
    let ProposalAction::Apply(m) = &p.action else {
        return error(StatusCode::UNPROCESSABLE_ENTITY, "UNSUPPORTED", "decomposition is not applied in sessions");
    };
    let result = match apply_rule(m.rule, m, &s.graph) {
        Ok(r) => r,
        Err(RewriteError::MatchStale) => {
            return error(StatusCode::CONFLICT, "STALE_PROPOSAL", "match no longer present")
        }
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, "POST_CONDITION", e.to_string()),
    };
    if !verify_rewrite(&s.graph, &result) || result.graphs.len() != 1 {
        return error(StatusCode::INTERNAL_SERVER_ERROR, "POST_CONDITION", "rewrite failed verification");
    }
    let doc = proposal_doc(&p, s.revision);
    s.graph = result.graphs.into_iter().next().unwrap();
    s.revision += 1;
    s.proposals = None;
    s.cost = price(&state, &s);
    let entry = HistoryEntry {
        revision: s.revision,
        action: "apply".into(),
        proposal: Some(doc),
        cost_eur_mo: s.cost.map(eur),
    };
    s.history.push(entry);
    persist(&state, &s);
    Json(json!({
        "revision": s.revision,
        "new_cost": s.cost.map(eur),
        "validation": report_to_doc(&validate_ipcg(&s.graph)),
        "graph": ipcg_to_doc(&s.graph),
    }))
    .into_response()
}

#[derive(Deserialize)]
struct ReplaceGraph {
    ipcg: IpcgDoc,
}

async fn replace_graph(State(state): State<Shared>, UrlPath(id): UrlPath<String>, body: Bytes) -> Response {
    let req: ReplaceGraph = match parse_body(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    let graph = match graph_from(&req.ipcg) {
        Ok(g) => g,
        Err(resp) => return resp,
    };
    let Some(s) = session(&state, &id).await else { return not_found("session") };
    let mut s = s.lock().await;
    let report = validate_ipcg(&graph);
    let doc: ReportDoc = report_to_doc(&report);
    if !report.is_correct() {
        return (
            StatusCode::UNPROCESSABLE_ENTITY,
            Json(json!({ "revision": s.revision, "validation": doc, "cost_eur_mo": Value::Null })),
        )
            .into_response();
    }
    s.graph = graph;
    s.revision += 1;
    s.proposals = None;
    s.cost = price(&state, &s);
    let entry = HistoryEntry {
        revision: s.revision,
        action: "edit".into(),
        proposal: None,
        cost_eur_mo: s.cost.map(eur),
    };
    s.history.push(entry);
    persist(&state, &s);
    Json(json!({ "revision": s.revision, "validation": doc, "cost_eur_mo": s.cost.map(eur) })).into_response()
}

async fn list_catalogs(State(state): State<Shared>) -> Json<Vec<String>> {
    Json(state.catalogs.keys().cloned().collect())
}

async fn list_regions(State(state): State<Shared>) -> Json<Vec<String>> {
    Json(state.regions.keys().cloned().collect())
}

async fn healthz() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/catalogs", get(list_catalogs))
        .route("/regions", get(list_regions))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/proposals", get(list_proposals))
        .route("/sessions/{id}/proposals/{pid}/preview", get(preview))
        .route("/sessions/{id}/apply", post(apply))
        .route("/sessions/{id}/graph", post(replace_graph))
        .with_state(state)
}

pub async fn serve(cfg: ServiceConfig) -> Result<(), String> {
    let state = AppState::load(&cfg).map_err(|e| e.to_string())?;
    state.check_regions().map_err(|e| e.to_string())?;
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", cfg.port))
        .await
        .map_err(|e| format!("bind port {}: {e}", cfg.port))?;
    axum::serve(listener, router(Arc::new(state)))
        .await
        .map_err(|e| e.to_string())
}
