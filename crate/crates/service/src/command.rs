use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use snapshot_hub_core::collab::{AccessRequest, Channel, Decision, Message, Posting, Reaction, ReactionTarget, User, View};
use snapshot_hub_core::data::{Dashboard, SchemaHint, SourceFormat, Value};
use snapshot_hub_core::snapshot::{
    Annotation, AnnotationTarget, ComponentRequest, ComposeRequest, InteractivityControl, SnapshotComponent,
    SnapshotVersion, Trigger,
};
use snapshot_hub_core::template::SizeClass;

/// A state-changing request. Every successfully applied command becomes one
/// journal record, and replaying the records rebuilds the state.
///
/// Views and interactions are commands too: they append telemetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(clippy::large_enum_variant)]
#[serde(tag = "kind", content = "body", rename_all = "kebab-case")]
pub enum Command {
    #[serde(rename_all = "camelCase")]
    IngestDataset {
        id: String,
        name: String,
        format: SourceFormat,
        source: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schema_hint: Option<SchemaHint>,
    },
    PutDashboard(Dashboard),
    AddUser(User),
    AddChannel(Channel),
    #[serde(rename_all = "camelCase")]
    AddMember { channel_id: String, user_id: String, actor_id: String },
    #[serde(rename_all = "camelCase")]
    CreateComponent { author_id: String, request: ComponentRequest },
    #[serde(rename_all = "camelCase")]
    AddControl { component_id: String, control: InteractivityControl },
    #[serde(rename_all = "camelCase")]
    Annotate { target: AnnotationTarget, annotation: Annotation },
    #[serde(rename_all = "camelCase")]
    Compose { creator_id: String, request: ComposeRequest },
    #[serde(rename_all = "camelCase")]
    Post {
        snapshot_id: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        version: Option<u32>,
        channel_id: String,
        author_id: String,
    },
    #[serde(rename_all = "camelCase")]
    Reshare { posting_id: String, channel_id: String, actor_id: String },
    #[serde(rename_all = "camelCase")]
    View { posting_id: String, viewer_id: String, size: SizeClass },
    #[serde(rename_all = "camelCase")]
    Interact { posting_id: String, viewer_id: String, control_id: String, value: Value, size: SizeClass },
    #[serde(rename_all = "camelCase")]
    React { target: ReactionTarget, user_id: String, emoji: String },
    #[serde(rename_all = "camelCase")]
    Comment {
        channel_id: String,
        user_id: String,
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thread_parent: Option<String>,
    },
    #[serde(rename_all = "camelCase")]
    RequestAccess { posting_id: String, requester_id: String },
    #[serde(rename_all = "camelCase")]
    DecideAccess { request_id: String, creator_id: String, decision: Decision },
    #[serde(rename_all = "camelCase")]
    Update { snapshot_id: String, trigger: Trigger, actor_id: String },
    Tick { to: NaiveDate },
}

impl Command {
    pub fn kind(&self) -> &'static str {
        match self {
            Command::IngestDataset { .. } => "ingest-dataset",
            Command::PutDashboard(_) => "put-dashboard",
            Command::AddUser(_) => "add-user",
            Command::AddChannel(_) => "add-channel",
            Command::AddMember { .. } => "add-member",
            Command::CreateComponent { .. } => "create-component",
            Command::AddControl { .. } => "add-control",
            Command::Annotate { .. } => "annotate",
            Command::Compose { .. } => "compose",
            Command::Post { .. } => "post",
            Command::Reshare { .. } => "reshare",
            Command::View { .. } => "view",
            Command::Interact { .. } => "interact",
            Command::React { .. } => "react",
            Command::Comment { .. } => "comment",
            Command::RequestAccess { .. } => "request-access",
            Command::DecideAccess { .. } => "decide-access",
            Command::Update { .. } => "update",
            Command::Tick { .. } => "tick",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetInfo {
    pub id: String,
    pub name: String,
    pub rows: usize,
}

/// One scheduled update performed by a tick.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PerformedUpdate {
    pub snapshot_id: String,
    pub version: u32,
    pub date: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posting_id: Option<String>,
}

/// A due snapshot that could not be updated on a given day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SkippedUpdate {
    pub snapshot_id: String,
    pub date: NaiveDate,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TickReport {
    pub from: NaiveDate,
    pub to: NaiveDate,
    pub performed: Vec<PerformedUpdate>,
    pub skipped: Vec<SkippedUpdate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UpdateOutcome {
    pub version: std::sync::Arc<SnapshotVersion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posting_id: Option<String>,
}

/// What a command returns, serialized as the bare payload.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(clippy::large_enum_variant)]
#[serde(untagged)]
pub enum Outcome {
    Dataset(DatasetInfo),
    Dashboard(Dashboard),
    User(User),
    Channel(Channel),
    Component(SnapshotComponent),
    Version(std::sync::Arc<SnapshotVersion>),
    Updated(UpdateOutcome),
    Posting(Posting),
    View(View),
    Reaction(Reaction),
    Message(Message),
    Access(AccessRequest),
    Tick(TickReport),
}
