use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::render::render_component;
use super::types::*;
use super::SnapshotError;
use crate::data::{extract_selection, Catalog, SelectionOverrides};
use crate::template::{TemplateKind, TemplateParams};
use crate::timeframe::{add_span, infer_freshness};

/// Everything needed to build one component from a dashboard widget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentRequest {
    pub dashboard_id: String,
    pub widget_id: String,
    #[serde(default)]
    pub overrides: SelectionOverrides,
    pub template_kind: TemplateKind,
    #[serde(default)]
    pub params: TemplateParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub creator_caption: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComposeRequest {
    pub component_ids: Vec<String>,
    pub curation: CurationMethod,
    pub target_channel_id: String,
    #[serde(default)]
    pub policy: UpdatePolicy,
    #[serde(default = "yes")]
    pub reshareable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completeness_note: Option<String>,
}

fn yes() -> bool {
    true
}

/// What an annotation is attached to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case")]
pub enum AnnotationTarget {
    #[serde(rename_all = "camelCase")]
    Draft { component_id: String },
    #[serde(rename_all = "camelCase")]
    Stored { snapshot_id: String, version: u32, component_id: String },
}

/// A snapshot and its append-only version list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnapshotRecord {
    pub id: String,
    pub creator_id: String,
    pub versions: Vec<Arc<SnapshotVersion>>,
    /// Date of the latest version, the base for interval scheduling.
    pub last_update: NaiveDate,
}

impl SnapshotRecord {
    pub fn latest(&self) -> &Arc<SnapshotVersion> {
        self.versions.last().expect("a snapshot always has version 1")
    }

    pub fn version(&self, n: u32) -> Option<&Arc<SnapshotVersion>> {
        self.versions.get((n as usize).checked_sub(1)?)
    }

    /// Next date the scheduler considers this snapshot, if it has an interval.
    pub fn next_due(&self) -> Option<NaiveDate> {
        match self.latest().policy.mode {
            UpdateMode::Interval { every } => Some(add_span(self.last_update, i64::from(every.count), every.unit)),
            UpdateMode::Manual => None,
        }
    }
}

/// A version together with its status at read time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VersionView {
    #[serde(flatten)]
    pub version: Arc<SnapshotVersion>,
    pub status: Status,
    pub hash: String,
}

/// Draft components and stored snapshots.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnapshotStore {
    drafts: BTreeMap<String, SnapshotComponent>,
    snapshots: BTreeMap<String, SnapshotRecord>,
    next_component: u64,
    next_snapshot: u64,
}

impl SnapshotStore {
    pub fn drafts(&self) -> impl Iterator<Item = &SnapshotComponent> {
        self.drafts.values()
    }

    pub fn draft(&self, id: &str) -> Result<&SnapshotComponent, SnapshotError> {
        self.drafts.get(id).ok_or_else(|| SnapshotError::UnknownComponent(id.to_owned()))
    }

    pub fn snapshots(&self) -> impl Iterator<Item = &SnapshotRecord> {
        self.snapshots.values()
    }

    pub fn get(&self, id: &str) -> Result<&SnapshotRecord, SnapshotError> {
        self.snapshots.get(id).ok_or_else(|| SnapshotError::UnknownSnapshot(id.to_owned()))
    }

    pub fn version(&self, id: &str, n: u32) -> Result<&Arc<SnapshotVersion>, SnapshotError> {
        self.get(id)?.version(n).ok_or_else(|| SnapshotError::UnknownVersion { snapshot: id.to_owned(), version: n })
    }

    /// Resolves the request and stores the result as a draft component.
    pub fn create_component(
        &mut self,
        req: &ComponentRequest,
        author_id: &str,
        catalog: &Catalog,
    ) -> Result<SnapshotComponent, SnapshotError> {
        let dashboard = catalog.dashboard(&req.dashboard_id)?;
        let widget = dashboard.widget(&req.widget_id)?.clone();
        let mut overrides = req.overrides.clone();
        if let (Some(d), None) = (&req.params.breakdown_dimension, &overrides.dimensions) {
            overrides.dimensions = Some(vec![d.clone()]);
        }
        let selection = extract_selection(dashboard, &req.widget_id, &overrides, catalog)?;
        let color_scale = widget.color_scale.as_deref().and_then(|s| dashboard.color_scale(s)).cloned();
        let r = render_component(&selection, req.template_kind, &req.params, &widget, color_scale.as_ref(), catalog)?;
        self.next_component += 1;
        let component = SnapshotComponent {
            id: format!("cmp-{}", self.next_component),
            author_id: author_id.to_owned(),
            selection,
            template_kind: req.template_kind,
            params: req.params.clone(),
            widget,
            color_scale,
            chart_spec: r.chart,
            caption: r.caption,
            creator_caption: req.creator_caption.clone().filter(|c| !c.trim().is_empty()),
            annotations: Vec::new(),
            controls: Vec::new(),
            gaps: r.gaps,
        };
        self.drafts.insert(component.id.clone(), component.clone());
        Ok(component)
    }

    /// Adds a consumer control to a draft component.
    pub fn add_control(
        &mut self,
        component_id: &str,
        control: InteractivityControl,
        catalog: &Catalog,
    ) -> Result<SnapshotComponent, SnapshotError> {
        let draft = self.drafts.get_mut(component_id).ok_or_else(|| SnapshotError::UnknownComponent(component_id.to_owned()))?;
        control.validate(catalog.dataset(&draft.selection.dataset_id)?)?;
        if draft.control(&control.id).is_some() {
            return Err(SnapshotError::InvalidControl(format!("duplicate control id `{}`", control.id)));
        }
        draft.controls.push(control);
        Ok(draft.clone())
    }

    /// Appends an annotation to a draft. Stored versions are never modified.
    pub fn annotate(&mut self, target: &AnnotationTarget, annotation: Annotation) -> Result<SnapshotComponent, SnapshotError> {
        match target {
            AnnotationTarget::Stored { snapshot_id, version, component_id } => {
                let v = self.version(snapshot_id, *version)?;
                if v.component(component_id).is_none() {
                    return Err(SnapshotError::UnknownComponent(component_id.clone()));
                }
                Err(SnapshotError::VersionImmutable { snapshot: snapshot_id.clone(), version: *version })
            }
            AnnotationTarget::Draft { component_id } => {
                let draft = self
                    .drafts
                    .get_mut(component_id)
                    .ok_or_else(|| SnapshotError::UnknownComponent(component_id.clone()))?;
                annotation.validate(draft.chart_spec.as_ref())?;
                draft.annotations.push(annotation);
                Ok(draft.clone())
            }
        }
    }

    /// Turns draft components into version 1 of a new snapshot.
    pub fn compose(&mut self, req: &ComposeRequest, creator_id: &str, now: NaiveDate) -> Result<Arc<SnapshotVersion>, SnapshotError> {
        if req.component_ids.is_empty() {
            return Err(SnapshotError::NoComponents);
        }
        req.curation.validate(req.component_ids.len())?;
        req.policy.validate()?;
        let mut seen = std::collections::BTreeSet::new();
        for id in &req.component_ids {
            self.draft(id)?;
            if !seen.insert(id) {
                return Err(SnapshotError::DuplicateComponent(id.clone()));
            }
        }
        let components: Vec<SnapshotComponent> =
            req.component_ids.iter().map(|id| self.drafts.remove(id).expect("checked above")).collect();
        self.next_snapshot += 1;
        let id = format!("snap-{}", self.next_snapshot);
        let version = Arc::new(SnapshotVersion {
            snapshot_id: id.clone(),
            version: 1,
            freshness_date: infer_freshness(components.iter().map(|c| c.time_frame()), now),
            components,
            curation: req.curation.clone(),
            creator_id: creator_id.to_owned(),
            target_channel_id: req.target_channel_id.clone(),
            reshareable: req.reshareable,
            policy: req.policy,
            completeness_note: req.completeness_note.clone().filter(|n| !n.trim().is_empty()),
            created_at: now,
            trigger: Trigger::Create,
            triggered_by: None,
        });
        self.snapshots.insert(
            id.clone(),
            SnapshotRecord { id, creator_id: creator_id.to_owned(), versions: vec![version.clone()], last_update: now },
        );
        Ok(version)
    }

    /// Appends a new version with advanced frames and regenerated content.
    ///
    /// Annotations and creator captions are dropped; controls carry over.
    pub fn update(
        &mut self,
        id: &str,
        now: NaiveDate,
        trigger: Trigger,
        actor: &str,
        catalog: &Catalog,
    ) -> Result<Arc<SnapshotVersion>, SnapshotError> {
        let record = self.get(id)?;
        let latest = record.latest().clone();
        match trigger {
            Trigger::Consumer if !latest.policy.consumer_refresh_allowed => {
                return Err(SnapshotError::RefreshNotPermitted(id.to_owned()))
            }
            Trigger::Manual if actor != record.creator_id => return Err(SnapshotError::NotCreator(actor.to_owned())),
            Trigger::Create => return Err(SnapshotError::InvalidTrigger),
            _ => {}
        }
        let mut advanced = false;
        let mut components = Vec::with_capacity(latest.components.len());
        for c in &latest.components {
            let mut selection = c.selection.clone();
            if let Some(tf) = &selection.time_frame {
                let next = tf.advance(now);
                advanced |= next != *tf;
                selection.time_frame = Some(next);
            }
            components.push((c, selection));
        }
        if !advanced && trigger != Trigger::Manual {
            return Err(SnapshotError::NothingToUpdate(id.to_owned()));
        }
        let components = components
            .into_iter()
            .map(|(c, selection)| {
                let r = render_component(&selection, c.template_kind, &c.params, &c.widget, c.color_scale.as_ref(), catalog)?;
                Ok(SnapshotComponent {
                    selection,
                    chart_spec: r.chart,
                    caption: r.caption,
                    gaps: r.gaps,
                    annotations: Vec::new(),
                    creator_caption: None,
                    ..c.clone()
                })
            })
            .collect::<Result<Vec<_>, SnapshotError>>()?;
        let version = Arc::new(SnapshotVersion {
            version: latest.version + 1,
            freshness_date: infer_freshness(components.iter().map(|c| c.time_frame()), now),
            components,
            created_at: now,
            trigger,
            triggered_by: Some(actor.to_owned()),
            ..(*latest).clone()
        });
        let record = self.snapshots.get_mut(id).expect("looked up above");
        record.versions.push(version.clone());
        record.last_update = now;
        Ok(version)
    }

    /// Interval snapshots whose next due date is on or before `now`.
    pub fn due_updates(&self, now: NaiveDate) -> Vec<String> {
        self.snapshots.values().filter(|r| r.next_due().is_some_and(|d| d <= now)).map(|r| r.id.clone()).collect()
    }

    pub fn version_history(&self, id: &str, now: NaiveDate) -> Result<Vec<VersionView>, SnapshotError> {
        Ok(self
            .get(id)?
            .versions
            .iter()
            .map(|v| VersionView { version: v.clone(), status: compute_status(v, now), hash: v.hash() })
            .collect())
    }
}

/// Freshness and completeness of a stored version as seen on `now`.
pub fn compute_status(v: &SnapshotVersion, now: NaiveDate) -> Status {
    let freshness = match v.freshness_date {
        Some(d) if now >= d => Freshness::Stale { since: d },
        _ => Freshness::Fresh,
    };
    let mut notes: Vec<String> = v.completeness_note.iter().cloned().collect();
    let gaps: Vec<&str> = v.components.iter().flat_map(|c| &c.gaps).map(|b| b.label.as_str()).collect();
    if !gaps.is_empty() {
        notes.push(format!("No data for {}", gaps.join(", ")));
    }
    let completeness = if notes.is_empty() {
        Completeness::Complete
    } else {
        Completeness::Incomplete { note: notes.join("; ") }
    };
    Status { freshness, freshness_date: v.freshness_date, completeness }
}
