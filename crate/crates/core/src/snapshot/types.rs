use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::SnapshotError;
use crate::data::{Dataset, FieldKind, Selection, Value, Widget};
use crate::template::{Caption, ChartSpec, ColorScale, TemplateKind, TemplateParams};
use crate::timeframe::{Bucket, Span, TimeFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnotationKind {
    Circle,
    Rect,
    Arrow,
    Line,
    Note,
}

/// Where an annotation is pinned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "kebab-case")]
pub enum Anchor {
    /// A point in data space: `x` is a value of the chart's x field.
    Data { x: serde_json::Value, y: f64 },
    /// A box in component-relative coordinates, each within `[0, 1]`.
    Box { x0: f64, y0: f64, x1: f64, y1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Annotation {
    pub kind: AnnotationKind,
    pub anchor: Anchor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub author_id: String,
}

impl Annotation {
    /// Checks the annotation against the chart it decorates.
    pub fn validate(&self, chart: Option<&ChartSpec>) -> Result<(), SnapshotError> {
        let bad = |m: &str| Err(SnapshotError::InvalidAnnotation(m.to_owned()));
        if self.kind == AnnotationKind::Note && self.text.as_deref().is_none_or(|t| t.trim().is_empty()) {
            return bad("a note needs text");
        }
        match &self.anchor {
            Anchor::Box { x0, y0, x1, y1 } => {
                let unit = |v: f64| (0.0..=1.0).contains(&v);
                if !(unit(*x0) && unit(*y0) && unit(*x1) && unit(*y1)) || x0 > x1 || y0 > y1 {
                    return bad("box corners must be ordered and within [0, 1]");
                }
            }
            Anchor::Data { x, y } => {
                if !y.is_finite() {
                    return bad("y must be a finite number");
                }
                let chart = match chart {
                    Some(c) => c,
                    None => return bad("data anchors need a chart"),
                };
                let fields: Vec<&str> =
                    chart.layers.iter().filter_map(|l| l.encoding.x.as_ref()).map(|c| c.field.as_str()).collect();
                let hit = chart.inline_data.iter().any(|row| fields.iter().any(|f| row.get(*f) == Some(x)));
                if !hit {
                    return bad("x is not a value on the chart's x axis");
                }
            }
        }
        Ok(())
    }
}

/// A filter the consumer may flip privately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InteractivityControl {
    pub id: String,
    pub field: String,
    pub allowed_values: Vec<Value>,
    pub default_value: Value,
    #[serde(default)]
    pub is_call_to_action: bool,
}

impl InteractivityControl {
    pub fn validate(&self, ds: &Dataset) -> Result<(), SnapshotError> {
        let bad = |m: String| Err(SnapshotError::InvalidControl(m));
        if self.id.trim().is_empty() {
            return bad("control id is empty".into());
        }
        match ds.field(&self.field) {
            Some(f) if f.kind == FieldKind::Dimension => {}
            Some(_) => return bad(format!("`{}` is not a dimension", self.field)),
            None => return bad(format!("`{}` is not a field of `{}`", self.field, ds.id)),
        }
        if self.allowed_values.is_empty() {
            return bad("allowed values are empty".into());
        }
        if !self.allowed_values.contains(&self.default_value) {
            return bad("default value is not an allowed value".into());
        }
        let domain = ds.domain(&self.field)?;
        if let Some(v) = self.allowed_values.iter().find(|v| !domain.contains(v)) {
            return bad(format!("`{v}` does not occur in `{}`", self.field));
        }
        Ok(())
    }
}

/// One chart and/or caption of a snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnapshotComponent {
    pub id: String,
    pub author_id: String,
    pub selection: Selection,
    pub template_kind: TemplateKind,
    pub params: TemplateParams,
    /// The source widget, kept for preserve-original re-rendering.
    pub widget: Widget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_scale: Option<ColorScale>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_spec: Option<ChartSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<Caption>,
    /// Free text written by the creator; dropped on update.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub creator_caption: Option<String>,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
    #[serde(default)]
    pub controls: Vec<InteractivityControl>,
    /// Buckets of the time frame that had no source rows when resolved.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gaps: Vec<Bucket>,
}

impl SnapshotComponent {
    pub fn time_frame(&self) -> Option<&TimeFrame> {
        self.selection.time_frame.as_ref()
    }

    pub fn control(&self, id: &str) -> Option<&InteractivityControl> {
        self.controls.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum CurationMethod {
    Stack,
    Carousel,
    #[serde(rename_all = "camelCase")]
    Slideshow {
        #[serde(default = "default_interval")]
        interval_seconds: u32,
    },
    /// One weight in `1..=3` per component, in component order.
    MiniDashboard { weights: Vec<u8> },
}

fn default_interval() -> u32 {
    5
}

impl CurationMethod {
    pub fn name(&self) -> &'static str {
        match self {
            CurationMethod::Stack => "stack",
            CurationMethod::Carousel => "carousel",
            CurationMethod::Slideshow { .. } => "slideshow",
            CurationMethod::MiniDashboard { .. } => "mini-dashboard",
        }
    }

    pub fn validate(&self, components: usize) -> Result<(), SnapshotError> {
        match self {
            CurationMethod::Slideshow { interval_seconds } if *interval_seconds < 1 => {
                Err(SnapshotError::InvalidCuration("slideshow interval must be at least 1 s".into()))
            }
            CurationMethod::MiniDashboard { .. } if components < 2 => {
                Err(SnapshotError::CurationArityMismatch { method: self.name(), components })
            }
            CurationMethod::MiniDashboard { weights } => {
                if weights.len() != components {
                    Err(SnapshotError::InvalidCuration(format!(
                        "{} weights for {components} components",
                        weights.len()
                    )))
                } else if weights.iter().any(|w| !(1..=3).contains(w)) {
                    Err(SnapshotError::InvalidCuration("weights must be 1, 2 or 3".into()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum UpdateMode {
    Manual,
    Interval { every: Span },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UpdatePolicy {
    #[serde(flatten)]
    pub mode: UpdateMode,
    #[serde(default)]
    pub consumer_refresh_allowed: bool,
}

impl UpdatePolicy {
    pub fn manual() -> Self {
        Self { mode: UpdateMode::Manual, consumer_refresh_allowed: false }
    }

    pub fn every(span: Span) -> Self {
        Self { mode: UpdateMode::Interval { every: span }, consumer_refresh_allowed: false }
    }

    pub fn validate(&self) -> Result<(), SnapshotError> {
        if let UpdateMode::Interval { every } = &self.mode {
            every.validate().map_err(|e| SnapshotError::InvalidPolicy(e.to_string()))?;
        }
        Ok(())
    }
}

impl Default for UpdatePolicy {
    fn default() -> Self {
        Self::manual()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trigger {
    Create,
    Scheduled,
    Manual,
    Consumer,
}

/// One immutable, numbered state of a snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnapshotVersion {
    pub snapshot_id: String,
    pub version: u32,
    pub components: Vec<SnapshotComponent>,
    pub curation: CurationMethod,
    pub creator_id: String,
    pub target_channel_id: String,
    pub reshareable: bool,
    pub policy: UpdatePolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completeness_note: Option<String>,
    pub created_at: NaiveDate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freshness_date: Option<NaiveDate>,
    pub trigger: Trigger,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triggered_by: Option<String>,
}

impl SnapshotVersion {
    /// Content hash of the canonical serialization.
    pub fn hash(&self) -> String {
        crate::canon::content_hash(self)
    }

    /// Datasets behind the version's selections.
    pub fn datasets(&self) -> std::collections::BTreeSet<&str> {
        self.components.iter().map(|c| c.selection.dataset_id.as_str()).collect()
    }

    pub fn component(&self, id: &str) -> Option<&SnapshotComponent> {
        self.components.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum Freshness {
    Fresh,
    #[serde(rename_all = "camelCase")]
    Stale { since: NaiveDate },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum Completeness {
    Complete,
    Incomplete { note: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Status {
    pub freshness: Freshness,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freshness_date: Option<NaiveDate>,
    pub completeness: Completeness,
}

impl Status {
    pub fn is_stale(&self) -> bool {
        matches!(self.freshness, Freshness::Stale { .. })
    }
}
