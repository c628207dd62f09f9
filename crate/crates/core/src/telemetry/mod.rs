//! Append-only engagement log, summaries, propagation graphs and the home feed.

mod feed;
mod graph;

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use feed::{home_feed, HomeFeedEntry};
pub use graph::{propagation, PropagationEdge, PropagationGraph, PropagationNode};

use crate::snapshot::Trigger;
use crate::template::SizeClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Post,
    View,
    ObfuscatedView,
    Interaction,
    Reshare,
    Reaction,
    Comment,
    Update,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventClass {
    Active,
    Passive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Payload {
    None,
    View { size: SizeClass },
    #[serde(rename_all = "camelCase")]
    Reshare { from_channel: String, to_channel: String },
    #[serde(rename_all = "camelCase")]
    Interaction { control_id: String, value: String },
    Reaction { emoji: String },
    #[serde(rename_all = "camelCase")]
    Comment { message_id: String },
    Update { trigger: Trigger },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TelemetryEvent {
    pub id: u64,
    pub kind: EventKind,
    pub class: EventClass,
    pub actor_id: String,
    pub snapshot_id: String,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posting_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_id: Option<String>,
    pub at: NaiveDate,
    pub payload: Payload,
}

/// An event before the log assigns its id and class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewEvent {
    pub kind: EventKind,
    pub actor_id: String,
    pub snapshot_id: String,
    pub version: u32,
    pub posting_id: Option<String>,
    pub channel_id: Option<String>,
    pub at: NaiveDate,
    pub payload: Payload,
    /// Whether an interaction came from a call-to-action control.
    pub call_to_action: bool,
}

impl NewEvent {
    pub fn new(kind: EventKind, actor_id: &str, snapshot_id: &str, version: u32, at: NaiveDate) -> Self {
        Self {
            kind,
            actor_id: actor_id.to_owned(),
            snapshot_id: snapshot_id.to_owned(),
            version,
            posting_id: None,
            channel_id: None,
            at,
            payload: Payload::None,
            call_to_action: false,
        }
    }

    pub fn on_posting(mut self, posting_id: &str, channel_id: &str) -> Self {
        self.posting_id = Some(posting_id.to_owned());
        self.channel_id = Some(channel_id.to_owned());
        self
    }

    pub fn with_payload(mut self, payload: Payload) -> Self {
        self.payload = payload;
        self
    }

    pub fn call_to_action(mut self, cta: bool) -> Self {
        self.call_to_action = cta;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TelemetryError {
    #[error("unknown reference `{0}`")]
    UnknownReference(String),
    #[error("unknown snapshot `{0}`")]
    UnknownSnapshot(String),
    #[error("reshare lineage is not a forest: {0}")]
    BrokenLineage(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TelemetryLog {
    events: Vec<TelemetryEvent>,
}

impl TelemetryLog {
    /// Appends `e`; ids are contiguous from 1 in arrival order.
    pub fn record(&mut self, e: NewEvent) -> u64 {
        let id = self.events.len() as u64 + 1;
        let class = if e.kind == EventKind::Interaction && e.call_to_action { EventClass::Active } else { EventClass::Passive };
        self.events.push(TelemetryEvent {
            id,
            kind: e.kind,
            class,
            actor_id: e.actor_id,
            snapshot_id: e.snapshot_id,
            version: e.version,
            posting_id: e.posting_id,
            channel_id: e.channel_id,
            at: e.at,
            payload: e.payload,
        });
        id
    }

    pub fn events(&self) -> &[TelemetryEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn for_snapshot<'a>(&'a self, snapshot_id: &'a str) -> impl Iterator<Item = &'a TelemetryEvent> + 'a {
        self.events.iter().filter(move |e| e.snapshot_id == snapshot_id)
    }

    /// Folds the snapshot's events up to and including `as_of`.
    pub fn summarize(&self, snapshot_id: &str, as_of: Option<NaiveDate>) -> TelemetrySummary {
        let mut s = TelemetrySummary::default();
        let mut viewers = BTreeSet::new();
        for e in self.for_snapshot(snapshot_id).filter(|e| as_of.is_none_or(|t| e.at <= t)) {
            match e.kind {
                EventKind::View => {
                    s.views += 1;
                    viewers.insert(e.actor_id.clone());
                    if let Some(c) = &e.channel_id {
                        *s.per_channel.entry(c.clone()).or_default() += 1;
                    }
                }
                EventKind::ObfuscatedView => s.obfuscated_views += 1,
                EventKind::Interaction => s.interactions += 1,
                EventKind::Reshare => s.reshares += 1,
                EventKind::Reaction => {
                    if let Payload::Reaction { emoji } = &e.payload {
                        *s.reactions.entry(emoji.clone()).or_default() += 1;
                    }
                }
                EventKind::Comment => s.comments += 1,
                EventKind::Update => s.updates += 1,
                EventKind::Post => s.postings += 1,
            }
            if e.class == EventClass::Active {
                s.active_count += 1;
            }
            s.last_activity = s.last_activity.max(Some(e.at));
        }
        s.unique_viewers = viewers.len() as u64;
        s.viewers = viewers;
        s
    }
}

/// Engagement counts for one snapshot across all its versions and postings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TelemetrySummary {
    pub views: u64,
    pub unique_viewers: u64,
    pub obfuscated_views: u64,
    pub reshares: u64,
    pub reactions: BTreeMap<String, u64>,
    pub comments: u64,
    pub interactions: u64,
    pub active_count: u64,
    pub per_channel: BTreeMap<String, u64>,
    pub postings: u64,
    pub updates: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_activity: Option<NaiveDate>,
    /// Viewer ids; only serialized when the deployment exposes them.
    #[serde(skip)]
    pub viewers: BTreeSet<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2022, 5, d).unwrap()
    }

    #[test]
    fn ids_increase_and_class_follows_cta() {
        let mut log = TelemetryLog::default();
        let a = log.record(NewEvent::new(EventKind::View, "u1", "s1", 1, day(1)));
        let b = log.record(NewEvent::new(EventKind::View, "u1", "s1", 1, day(1)));
        let c = log.record(NewEvent::new(EventKind::Interaction, "u1", "s1", 1, day(1)).call_to_action(true));
        let d = log.record(NewEvent::new(EventKind::Reaction, "u1", "s1", 1, day(1)).call_to_action(true));
        assert_eq!((a, b, c, d), (1, 2, 3, 4));
        assert_eq!(log.events()[2].class, EventClass::Active);
        assert_eq!(log.events()[3].class, EventClass::Passive);
    }

    #[test]
    fn repeated_views_count_once_as_unique() {
        let mut log = TelemetryLog::default();
        for _ in 0..3 {
            log.record(NewEvent::new(EventKind::View, "u1", "s1", 1, day(2)).on_posting("p1", "general"));
        }
        let s = log.summarize("s1", None);
        assert_eq!((s.views, s.unique_viewers), (3, 1));
        assert_eq!(s.per_channel["general"], 3);
        assert_eq!(log.summarize("s2", None), TelemetrySummary::default());
        assert_eq!(log.summarize("s1", Some(day(1))).views, 0);
    }
}
