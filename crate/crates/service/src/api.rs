//! HTTP/JSON routes. Bodies mirror the domain types; the acting user is the
//! `X-User-Id` header.
//!
//! `GET /postings/{id}/view` is the only read that changes state: it records
//! a view event.

use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use snapshot_hub_core::collab::{Channel, Decision, ReactionTarget, User};
use snapshot_hub_core::data::{Dashboard, SchemaHint, SelectionOverrides, SourceFormat, Value};
use snapshot_hub_core::snapshot::{
    Annotation, AnnotationTarget, ComponentRequest, ComposeRequest, InteractivityControl, Trigger,
};
use snapshot_hub_core::template::SizeClass;

use crate::command::{Command, Outcome};
use crate::error::HubError;
use crate::hub::Hub;

pub const ACTOR_HEADER: &str = "x-user-id";

pub type Shared = Arc<Mutex<Hub>>;

pub struct ApiError(pub HubError);

impl From<HubError> for ApiError {
    fn from(e: HubError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.class().http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.0.body())).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn lock(s: &Shared) -> MutexGuard<'_, Hub> {
    s.lock().unwrap_or_else(|p| p.into_inner())
}

fn actor(headers: &HeaderMap) -> Result<String, ApiError> {
    headers
        .get(ACTOR_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::to_owned)
        .ok_or_else(|| ApiError(HubError::BadRequest("missing X-User-Id header".into())))
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError(HubError::BadRequest(e.to_string())))
}

fn exec(s: &Shared, cmd: Command) -> ApiResult<Outcome> {
    Ok(Json(lock(s).execute(cmd)?))
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/datasets", post(ingest))
        .route("/dashboards", post(put_dashboard))
        .route("/dashboards/{id}", get(get_dashboard))
        .route("/users", post(add_user))
        .route("/selections/resolve", post(resolve))
        .route("/components", post(create_component))
        .route("/components/{id}/annotations", post(annotate_draft))
        .route("/components/{id}/controls", post(add_control))
        .route("/snapshots", post(compose))
        .route("/snapshots/{id}/versions", get(versions))
        .route("/snapshots/{id}/versions/{version}/components/{component}/annotations", post(annotate_stored))
        .route("/snapshots/{id}/update", post(update))
        .route("/snapshots/{id}/status", get(status))
        .route("/channels", post(add_channel))
        .route("/channels/{id}", get(get_channel))
        .route("/channels/{id}/members", post(add_member))
        .route("/channels/{id}/messages", post(comment))
        .route("/postings", post(post_snapshot))
        .route("/postings/{id}/reshare", post(reshare))
        .route("/postings/{id}/view", get(view))
        .route("/postings/{id}/interact", post(interact))
        .route("/postings/{id}/reactions", post(react_posting))
        .route("/messages/{id}/reactions", post(react_message))
        .route("/access-requests", post(request_access))
        .route("/access-requests/{id}/decision", post(decide_access))
        .route("/telemetry/snapshots/{id}", get(summary))
        .route("/telemetry/snapshots/{id}/propagation", get(propagation))
        .route("/home/{creator}", get(home))
        .route("/admin/tick", post(tick))
        .route("/admin/checkpoint", post(checkpoint))
        .route("/admin/state-hash", get(state_hash))
        .with_state(state)
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestBody {
    pub id: String,
    #[serde(default)]
    pub name: Option<String>,
    pub format: SourceFormat,
    pub source: String,
    #[serde(default)]
    pub schema_hint: Option<SchemaHint>,
}

async fn ingest(State(s): State<Shared>, body: Bytes) -> ApiResult<Outcome> {
    let b: IngestBody = parse(&body)?;
    let name = b.name.unwrap_or_else(|| b.id.clone());
    exec(&s, Command::IngestDataset { id: b.id, name, format: b.format, source: b.source, schema_hint: b.schema_hint })
}

async fn put_dashboard(State(s): State<Shared>, body: Bytes) -> ApiResult<Outcome> {
    exec(&s, Command::PutDashboard(parse::<Dashboard>(&body)?))
}

async fn get_dashboard(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<Dashboard> {
    Ok(Json(lock(&s).dashboard(&id)?.clone()))
}

async fn add_user(State(s): State<Shared>, body: Bytes) -> ApiResult<Outcome> {
    exec(&s, Command::AddUser(parse::<User>(&body)?))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ResolveBody {
    dashboard_id: String,
    widget_id: String,
    #[serde(default)]
    overrides: SelectionOverrides,
}

async fn resolve(State(s): State<Shared>, body: Bytes) -> ApiResult<crate::hub::Resolved> {
    let b: ResolveBody = parse(&body)?;
    Ok(Json(lock(&s).resolve(&b.dashboard_id, &b.widget_id, &b.overrides)?))
}

async fn create_component(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult<Outcome> {
    let author_id = actor(&headers)?;
    exec(&s, Command::CreateComponent { author_id, request: parse::<ComponentRequest>(&body)? })
}

async fn annotate_draft(State(s): State<Shared>, Path(id): Path<String>, body: Bytes) -> ApiResult<Outcome> {
    let annotation: Annotation = parse(&body)?;
    exec(&s, Command::Annotate { target: AnnotationTarget::Draft { component_id: id }, annotation })
}

async fn annotate_stored(
    State(s): State<Shared>,
    Path((snapshot_id, version, component_id)): Path<(String, u32, String)>,
    body: Bytes,
) -> ApiResult<Outcome> {
    let annotation: Annotation = parse(&body)?;
    exec(&s, Command::Annotate { target: AnnotationTarget::Stored { snapshot_id, version, component_id }, annotation })
}

async fn add_control(State(s): State<Shared>, Path(id): Path<String>, body: Bytes) -> ApiResult<Outcome> {
    exec(&s, Command::AddControl { component_id: id, control: parse::<InteractivityControl>(&body)? })
}

async fn compose(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult<Outcome> {
    let creator_id = actor(&headers)?;
    exec(&s, Command::Compose { creator_id, request: parse::<ComposeRequest>(&body)? })
}

async fn versions(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<Vec<snapshot_hub_core::snapshot::VersionView>> {
    Ok(Json(lock(&s).versions(&id)?))
}

#[derive(Deserialize, Default)]
struct UpdateBody {
    #[serde(default)]
    trigger: Option<Trigger>,
}

async fn update(State(s): State<Shared>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult<Outcome> {
    let actor_id = actor(&headers)?;
    let b: UpdateBody = if body.is_empty() { UpdateBody::default() } else { parse(&body)? };
    exec(&s, Command::Update { snapshot_id: id, trigger: b.trigger.unwrap_or(Trigger::Manual), actor_id })
}

async fn status(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<crate::hub::StatusView> {
    Ok(Json(lock(&s).status(&id)?))
}

async fn add_channel(State(s): State<Shared>, body: Bytes) -> ApiResult<Outcome> {
    exec(&s, Command::AddChannel(parse::<Channel>(&body)?))
}

async fn get_channel(State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<crate::hub::ChannelView> {
    Ok(Json(lock(&s).channel(&id)?))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct MemberBody {
    user_id: String,
}

async fn add_member(State(s): State<Shared>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult<Outcome> {
    let actor_id = actor(&headers)?;
    let b: MemberBody = parse(&body)?;
    exec(&s, Command::AddMember { channel_id: id, user_id: b.user_id, actor_id })
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct MessageBody {
    text: String,
    #[serde(default)]
    thread_parent: Option<String>,
}

async fn comment(State(s): State<Shared>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult<Outcome> {
    let user_id = actor(&headers)?;
    let b: MessageBody = parse(&body)?;
    exec(&s, Command::Comment { channel_id: id, user_id, text: b.text, thread_parent: b.thread_parent })
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct PostBody {
    snapshot_id: String,
    #[serde(default)]
    version: Option<u32>,
    channel_id: String,
}

async fn post_snapshot(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult<Outcome> {
    let author_id = actor(&headers)?;
    let b: PostBody = parse(&body)?;
    exec(&s, Command::Post { snapshot_id: b.snapshot_id, version: b.version, channel_id: b.channel_id, author_id })
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ReshareBody {
    channel_id: String,
}

async fn reshare(State(s): State<Shared>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult<Outcome> {
    let actor_id = actor(&headers)?;
    let b: ReshareBody = parse(&body)?;
    exec(&s, Command::Reshare { posting_id: id, channel_id: b.channel_id, actor_id })
}

#[derive(Deserialize)]
struct SizeQuery {
    #[serde(default)]
    size: Option<String>,
}

fn size_of(q: Option<&str>) -> Result<SizeClass, ApiError> {
    match q {
        None => Ok(SizeClass::Wide),
        Some(v) => v.parse().map_err(|e: String| ApiError(HubError::BadRequest(e))),
    }
}

async fn view(
    State(s): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<SizeQuery>,
    headers: HeaderMap,
) -> ApiResult<Outcome> {
    let viewer_id = actor(&headers)?;
    let size = size_of(q.size.as_deref())?;
    exec(&s, Command::View { posting_id: id, viewer_id, size })
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct InteractBody {
    control_id: String,
    value: Value,
    #[serde(default)]
    size: Option<String>,
}

async fn interact(State(s): State<Shared>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult<Outcome> {
    let viewer_id = actor(&headers)?;
    let b: InteractBody = parse(&body)?;
    let size = size_of(b.size.as_deref())?;
    exec(&s, Command::Interact { posting_id: id, viewer_id, control_id: b.control_id, value: b.value, size })
}

#[derive(Deserialize)]
struct ReactionBody {
    emoji: String,
}

async fn react_posting(State(s): State<Shared>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult<Outcome> {
    let user_id = actor(&headers)?;
    let b: ReactionBody = parse(&body)?;
    exec(&s, Command::React { target: ReactionTarget::Posting(id), user_id, emoji: b.emoji })
}

async fn react_message(State(s): State<Shared>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult<Outcome> {
    let user_id = actor(&headers)?;
    let b: ReactionBody = parse(&body)?;
    exec(&s, Command::React { target: ReactionTarget::Message(id), user_id, emoji: b.emoji })
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct AccessBody {
    posting_id: String,
}

async fn request_access(State(s): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult<Outcome> {
    let requester_id = actor(&headers)?;
    let b: AccessBody = parse(&body)?;
    exec(&s, Command::RequestAccess { posting_id: b.posting_id, requester_id })
}

#[derive(Deserialize)]
struct DecisionBody {
    decision: Decision,
}

async fn decide_access(State(s): State<Shared>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> ApiResult<Outcome> {
    let creator_id = actor(&headers)?;
    let b: DecisionBody = parse(&body)?;
    exec(&s, Command::DecideAccess { request_id: id, creator_id, decision: b.decision })
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct AsOfQuery {
    #[serde(default)]
    as_of: Option<NaiveDate>,
}

async fn summary(State(s): State<Shared>, Path(id): Path<String>, Query(q): Query<AsOfQuery>) -> ApiResult<crate::hub::SummaryView> {
    Ok(Json(lock(&s).summary(&id, q.as_of)?))
}

async fn propagation(
    State(s): State<Shared>,
    Path(id): Path<String>,
) -> ApiResult<snapshot_hub_core::telemetry::PropagationGraph> {
    Ok(Json(lock(&s).propagation(&id)?))
}

async fn home(State(s): State<Shared>, Path(creator): Path<String>) -> ApiResult<Vec<snapshot_hub_core::telemetry::HomeFeedEntry>> {
    Ok(Json(lock(&s).home(&creator)?))
}

#[derive(Deserialize)]
struct TickBody {
    to: NaiveDate,
}

async fn tick(State(s): State<Shared>, body: Bytes) -> ApiResult<Outcome> {
    let b: TickBody = parse(&body)?;
    exec(&s, Command::Tick { to: b.to })
}

async fn checkpoint(State(s): State<Shared>) -> ApiResult<crate::hub::CheckpointInfo> {
    Ok(Json(lock(&s).checkpoint()?))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StateHash {
    pub seq: u64,
    pub today: NaiveDate,
    pub state_hash: String,
}

async fn state_hash(State(s): State<Shared>) -> ApiResult<StateHash> {
    let hub = lock(&s);
    Ok(Json(StateHash { seq: hub.seq(), today: hub.now(), state_hash: hub.state_hash() }))
}
