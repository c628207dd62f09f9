use serde::{Deserialize, Serialize};

use crate::snapshot::{Annotation, CurationMethod, InteractivityControl, SnapshotComponent, SnapshotVersion, Status};
use crate::template::{responsive_variant, Caption, ChartSpec, SizeClass, TemplateKind};

/// What a viewer receives for a posting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum View {
    Rendered(RenderedView),
    Obfuscated(ObfuscatedView),
}

impl View {
    pub fn is_rendered(&self) -> bool {
        matches!(self, View::Rendered(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentView {
    pub id: String,
    pub template_kind: TemplateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<Caption>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub creator_caption: Option<String>,
    pub annotations: Vec<Annotation>,
    pub controls: Vec<InteractivityControl>,
}

impl ComponentView {
    pub fn of(c: &SnapshotComponent, size: SizeClass) -> Self {
        Self {
            id: c.id.clone(),
            template_kind: c.template_kind,
            chart: c.chart_spec.as_ref().map(|s| responsive_variant(s, size)),
            caption: c.caption.clone(),
            creator_caption: c.creator_caption.clone(),
            annotations: c.annotations.clone(),
            controls: c.controls.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderedView {
    pub posting_id: String,
    pub snapshot_id: String,
    pub version: u32,
    pub latest_version: u32,
    pub size: SizeClass,
    pub status: Status,
    pub curation: CurationMethod,
    pub components: Vec<ComponentView>,
    /// Set for interaction results, which only the interacting viewer sees.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub private: bool,
}

impl RenderedView {
    pub(super) fn of(posting_id: &str, v: &SnapshotVersion, latest: u32, size: SizeClass, status: Status) -> Self {
        Self {
            posting_id: posting_id.to_owned(),
            snapshot_id: v.snapshot_id.clone(),
            version: v.version,
            latest_version: latest,
            size,
            status,
            curation: v.curation.clone(),
            components: v.components.iter().map(|c| ComponentView::of(c, size)).collect(),
            private: false,
        }
    }
}

/// Stand-in for a snapshot the viewer may not see. Carries no data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ObfuscatedView {
    pub posting_id: String,
    pub snapshot_id: String,
    pub version: u32,
    pub reason: String,
    pub request_access_available: bool,
}
