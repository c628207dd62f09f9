use std::cmp::Reverse;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{TelemetryLog, TelemetrySummary};
use crate::snapshot::{compute_status, SnapshotStore, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HomeFeedEntry {
    pub snapshot_id: String,
    pub latest_version: u32,
    pub status: Status,
    pub summary: TelemetrySummary,
    pub stale_and_due: bool,
    /// Latest of the newest version's date and the latest engagement.
    pub last_activity: NaiveDate,
}

/// The creator's snapshots, stale ones first, then most recently active.
pub fn home_feed(creator_id: &str, now: NaiveDate, store: &SnapshotStore, log: &TelemetryLog) -> Vec<HomeFeedEntry> {
    let mut entries: Vec<HomeFeedEntry> = store
        .snapshots()
        .filter(|r| r.creator_id == creator_id)
        .map(|r| {
            let latest = r.latest();
            let status = compute_status(latest, now);
            let summary = log.summarize(&r.id, Some(now));
            let last_activity = summary.last_activity.map_or(latest.created_at, |a| a.max(latest.created_at));
            HomeFeedEntry {
                snapshot_id: r.id.clone(),
                latest_version: latest.version,
                stale_and_due: status.is_stale(),
                status,
                summary,
                last_activity,
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        (Reverse(a.stale_and_due), Reverse(a.last_activity), &a.snapshot_id).cmp(&(
            Reverse(b.stale_and_due),
            Reverse(b.last_activity),
            &b.snapshot_id,
        ))
    });
    entries
}
