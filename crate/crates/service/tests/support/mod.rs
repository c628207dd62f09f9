#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde_json::{json, Value};
use snapshot_hub_service::{Clock, Command, Hub, HubOptions};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

pub fn options(start: &str) -> HubOptions {
    HubOptions { clock: Clock::virtual_at(date(start)), expose_viewer_names: false }
}

pub fn cmd(v: Value) -> Command {
    serde_json::from_value(v).unwrap()
}

pub fn ingest(id: &str) -> Command {
    let source = std::fs::read_to_string(fixtures_dir().join(format!("{id}.csv"))).unwrap();
    cmd(json!({"kind": "ingest-dataset", "body": {"id": id, "name": id, "format": "csv", "source": source}}))
}

pub fn dashboard() -> Command {
    let d: Value = serde_json::from_str(&std::fs::read_to_string(fixtures_dir().join("demo-dashboard.json")).unwrap()).unwrap();
    cmd(json!({"kind": "put-dashboard", "body": d}))
}

pub fn user(id: &str, grants: &[&str]) -> Command {
    cmd(json!({"kind": "add-user", "body": {"id": id, "displayName": id, "datasetGrants": grants}}))
}

pub fn channel(id: &str, members: &[&str]) -> Command {
    cmd(json!({"kind": "add-channel", "body": {"id": id, "name": id, "visibility": "public", "members": members}}))
}

/// Component over one month of `field`, anchored at `anchor`, bucketed daily.
pub fn component(author: &str, widget: &str, kind: &str, field: &str, anchor: &str) -> Command {
    component_over(author, widget, kind, field, anchor, (1, "month"))
}

pub fn component_over(author: &str, widget: &str, kind: &str, field: &str, anchor: &str, span: (u32, &str)) -> Command {
    cmd(json!({"kind": "create-component", "body": {"authorId": author, "request": {
        "dashboardId": "ops",
        "widgetId": widget,
        "overrides": {"timeFrame": {
            "temporalField": field, "anchor": anchor,
            "span": {"count": span.0, "unit": span.1}, "bucketUnit": "day"
        }},
        "templateKind": kind
    }}}))
}

pub fn compose(creator: &str, components: &[&str], every: Option<(u32, &str)>) -> Command {
    let policy = match every {
        Some((count, unit)) => json!({"mode": "interval", "every": {"count": count, "unit": unit}}),
        None => json!({"mode": "manual"}),
    };
    cmd(json!({"kind": "compose", "body": {"creatorId": creator, "request": {
        "componentIds": components, "curation": {"method": "stack"},
        "targetChannelId": "sales-team", "policy": policy, "reshareable": true
    }}}))
}

pub fn tick(to: &str) -> Command {
    cmd(json!({"kind": "tick", "body": {"to": to}}))
}

/// Datasets, dashboard, three users, one channel and a monthly snapshot that
/// has been posted and viewed.
pub fn seed() -> Vec<Command> {
    vec![
        ingest("sales"),
        ingest("tickets"),
        dashboard(),
        user("ana", &["sales"]),
        user("bo", &["sales", "tickets"]),
        user("cy", &[]),
        channel("sales-team", &["ana", "bo", "cy"]),
        component("ana", "sales-by-region", "categorical-breakdown", "order_date", "2022-04-01"),
        compose("ana", &["cmp-1"], Some((1, "month"))),
        cmd(json!({"kind": "post", "body": {"snapshotId": "snap-1", "channelId": "sales-team", "authorId": "ana"}})),
        cmd(json!({"kind": "view", "body": {"postingId": "post-1", "viewerId": "bo", "size": "wide"}})),
        cmd(json!({"kind": "view", "body": {"postingId": "post-1", "viewerId": "cy", "size": "narrow"}})),
        cmd(json!({"kind": "react", "body": {"target": {"type": "posting", "id": "post-1"}, "userId": "bo", "emoji": "tada"}})),
    ]
}

pub fn run(hub: &mut Hub, cmds: impl IntoIterator<Item = Command>) {
    for c in cmds {
        let kind = c.kind();
        hub.execute(c).unwrap_or_else(|e| panic!("{kind}: {e}"));
    }
}
