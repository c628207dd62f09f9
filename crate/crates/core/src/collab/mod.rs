//! Emulated collaboration platform: users, channels, postings, threads,
//! reactions, permission-gated views and access requests.

mod platform;
mod view;

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use platform::{Ctx, Platform};
pub use view::{ComponentView, ObfuscatedView, RenderedView, View};

use crate::snapshot::SnapshotError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct User {
    pub id: String,
    pub display_name: String,
    #[serde(default)]
    pub dataset_grants: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Visibility {
    Public,
    Private,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub id: String,
    pub name: String,
    pub visibility: Visibility,
    pub members: BTreeSet<String>,
}

/// A snapshot version embedded in a channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Posting {
    pub id: String,
    /// Creation order across all postings.
    pub seq: u64,
    pub channel_id: String,
    pub author_id: String,
    pub snapshot_id: String,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_posting_id: Option<String>,
    pub posted_at: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Message {
    pub id: String,
    pub channel_id: String,
    pub author_id: String,
    pub text: String,
    /// A message or posting in the same channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thread_parent: Option<String>,
    pub at: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "id", rename_all = "kebab-case")]
pub enum ReactionTarget {
    Posting(String),
    Message(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Reaction {
    pub target: ReactionTarget,
    pub user_id: String,
    pub emoji: String,
    pub at: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccessState {
    Pending,
    Granted,
    Denied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Grant,
    Deny,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AccessRequest {
    pub id: String,
    pub posting_id: String,
    pub requester_id: String,
    pub state: AccessState,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CollabError {
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error("user `{0}` already exists")]
    DuplicateUser(String),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("channel `{0}` already exists")]
    DuplicateChannel(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("unknown posting `{0}`")]
    UnknownPosting(String),
    #[error("unknown message or posting `{0}`")]
    UnknownRef(String),
    #[error("unknown access request `{0}`")]
    UnknownRequest(String),
    #[error("`{user}` is not a member of `{channel}`")]
    NotAMember { user: String, channel: String },
    #[error("snapshot `{0}` may not be reshared")]
    ReshareForbidden(String),
    #[error("unknown control `{0}`")]
    UnknownControl(String),
    #[error("value is not allowed for control `{0}`")]
    InvalidControlValue(String),
    #[error("`{0}` already has access to this posting")]
    NotObfuscatedForUser(String),
    #[error("`{0}` did not create this snapshot")]
    NotCreator(String),
    #[error("access request `{0}` is already decided")]
    RequestClosed(String),
    #[error("message text is empty")]
    EmptyMessage,
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}
