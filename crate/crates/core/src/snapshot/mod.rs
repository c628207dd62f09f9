//! Snapshot components, curation, immutable versions, status and updates.

mod render;
mod store;
mod types;

pub use render::{render_component, Rendered};
pub use store::{
    compute_status, AnnotationTarget, ComponentRequest, ComposeRequest, SnapshotRecord, SnapshotStore, VersionView,
};
pub use types::{
    Anchor, Annotation, AnnotationKind, Completeness, CurationMethod, Freshness, InteractivityControl,
    SnapshotComponent, SnapshotVersion, Status, Trigger, UpdateMode, UpdatePolicy,
};

use thiserror::Error;

use crate::data::DataError;
use crate::template::TemplateError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),
    #[error("invalid control: {0}")]
    InvalidControl(String),
    #[error("{method} curation cannot hold {components} component(s)")]
    CurationArityMismatch { method: &'static str, components: usize },
    #[error("invalid curation: {0}")]
    InvalidCuration(String),
    #[error("invalid update policy: {0}")]
    InvalidPolicy(String),
    #[error("a snapshot needs at least one component")]
    NoComponents,
    #[error("component `{0}` listed twice")]
    DuplicateComponent(String),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("unknown snapshot `{0}`")]
    UnknownSnapshot(String),
    #[error("snapshot `{snapshot}` has no version {version}")]
    UnknownVersion { snapshot: String, version: u32 },
    #[error("version {version} of `{snapshot}` is immutable")]
    VersionImmutable { snapshot: String, version: u32 },
    #[error("consumers may not refresh `{0}`")]
    RefreshNotPermitted(String),
    #[error("`{0}` is not the snapshot's creator")]
    NotCreator(String),
    #[error("no time frame of `{0}` can advance yet")]
    NothingToUpdate(String),
    #[error("updates cannot use the create trigger")]
    InvalidTrigger,
}
