use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use snapshot_hub_core::canon::content_hash;
use snapshot_hub_core::collab::{Channel, Ctx, Message, Platform, Posting, User};
use snapshot_hub_core::data::{
    extract_selection, load_dataset, resolve_selection, Catalog, Dashboard, Selection, SelectionOverrides,
};
use snapshot_hub_core::snapshot::{compute_status, SnapshotStore, Status, Trigger, VersionView};
use snapshot_hub_core::telemetry::{
    home_feed, propagation, EventKind, HomeFeedEntry, NewEvent, Payload, PropagationGraph, TelemetryLog,
    TelemetrySummary,
};
use snapshot_hub_core::Table;

use crate::clock::{Clock, ClockMode};
use crate::command::*;
use crate::error::HubError;
use crate::journal::{self, Checkpoint, Journal};

/// Actor recorded on scheduled updates.
pub const SCHEDULER: &str = "scheduler";

/// Everything the journal materializes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct State {
    pub catalog: Catalog,
    pub snapshots: SnapshotStore,
    pub platform: Platform,
    pub telemetry: TelemetryLog,
    /// Latest date any command was applied at.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub today: Option<NaiveDate>,
}

impl State {
    fn ctx(&self) -> Ctx<'_> {
        Ctx { catalog: &self.catalog, snapshots: &self.snapshots }
    }

    pub fn hash(&self) -> String {
        content_hash(self)
    }

    /// Applies one command at `now`. Fails without side effects on `self`
    /// except where noted on the command.
    pub fn apply(&mut self, cmd: &Command, now: NaiveDate) -> Result<Outcome, HubError> {
        let out = self.apply_inner(cmd, now)?;
        let reached = match cmd {
            Command::Tick { to } => *to,
            _ => now,
        };
        self.today = Some(self.today.map_or(reached, |t| t.max(reached)));
        Ok(out)
    }

    fn apply_inner(&mut self, cmd: &Command, now: NaiveDate) -> Result<Outcome, HubError> {
        Ok(match cmd {
            Command::IngestDataset { id, name, format, source, schema_hint } => {
                if id.trim().is_empty() {
                    return Err(HubError::BadRequest("dataset id must not be empty".into()));
                }
                let ds = load_dataset(id, name, source.as_bytes(), *format, schema_hint.as_ref())?;
                let info = DatasetInfo { id: ds.id.clone(), name: ds.name.clone(), rows: ds.len() };
                self.catalog.insert_dataset(ds);
                Outcome::Dataset(info)
            }
            Command::PutDashboard(d) => {
                self.catalog.insert_dashboard(d.clone())?;
                Outcome::Dashboard(d.clone())
            }
            Command::AddUser(u) => Outcome::User(self.platform.add_user(u.clone(), &self.catalog)?),
            Command::AddChannel(c) => Outcome::Channel(self.platform.add_channel(c.clone())?),
            Command::AddMember { channel_id, user_id, actor_id } => {
                Outcome::Channel(self.platform.add_member(channel_id, user_id, actor_id)?)
            }
            Command::CreateComponent { author_id, request } => {
                self.platform.user(author_id)?;
                Outcome::Component(self.snapshots.create_component(request, author_id, &self.catalog)?)
            }
            Command::AddControl { component_id, control } => {
                Outcome::Component(self.snapshots.add_control(component_id, control.clone(), &self.catalog)?)
            }
            Command::Annotate { target, annotation } => {
                Outcome::Component(self.snapshots.annotate(target, annotation.clone())?)
            }
            Command::Compose { creator_id, request } => {
                self.platform.user(creator_id)?;
                self.platform.channel(&request.target_channel_id)?;
                Outcome::Version(self.snapshots.compose(request, creator_id, now)?)
            }
            Command::Post { snapshot_id, version, channel_id, author_id } => {
                let record = self.snapshots.get(snapshot_id)?;
                let version = version.unwrap_or(record.latest().version);
                let ctx = Ctx { catalog: &self.catalog, snapshots: &self.snapshots };
                Outcome::Posting(self.platform.post(
                    ctx,
                    &mut self.telemetry,
                    snapshot_id,
                    version,
                    channel_id,
                    author_id,
                    now,
                )?)
            }
            Command::Reshare { posting_id, channel_id, actor_id } => {
                let ctx = Ctx { catalog: &self.catalog, snapshots: &self.snapshots };
                Outcome::Posting(self.platform.reshare(ctx, &mut self.telemetry, posting_id, channel_id, actor_id, now)?)
            }
            Command::View { posting_id, viewer_id, size } => {
                let ctx = Ctx { catalog: &self.catalog, snapshots: &self.snapshots };
                Outcome::View(self.platform.view(ctx, &mut self.telemetry, posting_id, viewer_id, *size, now)?)
            }
            Command::Interact { posting_id, viewer_id, control_id, value, size } => {
                let ctx = Ctx { catalog: &self.catalog, snapshots: &self.snapshots };
                Outcome::View(self.platform.interact(
                    ctx,
                    &mut self.telemetry,
                    posting_id,
                    viewer_id,
                    control_id,
                    value,
                    *size,
                    now,
                )?)
            }
            Command::React { target, user_id, emoji } => {
                Outcome::Reaction(self.platform.react(&mut self.telemetry, target.clone(), user_id, emoji, now)?)
            }
            Command::Comment { channel_id, user_id, text, thread_parent } => Outcome::Message(self.platform.comment(
                &mut self.telemetry,
                channel_id,
                user_id,
                text,
                thread_parent.as_deref(),
                now,
            )?),
            Command::RequestAccess { posting_id, requester_id } => {
                let ctx = Ctx { catalog: &self.catalog, snapshots: &self.snapshots };
                Outcome::Access(self.platform.request_access(ctx, posting_id, requester_id)?)
            }
            Command::DecideAccess { request_id, creator_id, decision } => {
                let ctx = Ctx { catalog: &self.catalog, snapshots: &self.snapshots };
                Outcome::Access(self.platform.decide_access(ctx, request_id, creator_id, *decision)?)
            }
            Command::Update { snapshot_id, trigger, actor_id } => {
                if *trigger == Trigger::Scheduled {
                    return Err(HubError::BadRequest("scheduled updates are performed by ticks".into()));
                }
                Outcome::Updated(self.update(snapshot_id, *trigger, actor_id, now)?)
            }
            Command::Tick { to } => Outcome::Tick(self.tick(now, *to)),
        })
    }

    /// Appends a version, records the update and posts it where the snapshot lives.
    ///
    /// The posting is best effort: a creator who left the target channel
    /// still gets the new version.
    fn update(&mut self, id: &str, trigger: Trigger, actor: &str, now: NaiveDate) -> Result<UpdateOutcome, HubError> {
        let version = self.snapshots.update(id, now, trigger, actor, &self.catalog)?;
        self.telemetry.record(
            NewEvent::new(EventKind::Update, actor, id, version.version, now).with_payload(Payload::Update { trigger }),
        );
        let ctx = Ctx { catalog: &self.catalog, snapshots: &self.snapshots };
        let posting_id = self
            .platform
            .post(
                ctx,
                &mut self.telemetry,
                id,
                version.version,
                &version.target_channel_id,
                &version.creator_id,
                now,
            )
            .ok()
            .map(|p| p.id);
        Ok(UpdateOutcome { version, posting_id })
    }

    /// Walks the clock one day at a time from `from` (exclusive) to `to`,
    /// running whatever is due on each day in snapshot id order.
    fn tick(&mut self, from: NaiveDate, to: NaiveDate) -> TickReport {
        let mut report = TickReport { from, to, performed: Vec::new(), skipped: Vec::new() };
        let mut day = from;
        while day < to {
            day = day.succ_opt().expect("date in range");
            for id in self.snapshots.due_updates(day) {
                match self.update(&id, Trigger::Scheduled, SCHEDULER, day) {
                    Ok(u) => report.performed.push(PerformedUpdate {
                        snapshot_id: id,
                        version: u.version.version,
                        date: day,
                        posting_id: u.posting_id,
                    }),
                    Err(e) => report.skipped.push(SkippedUpdate { snapshot_id: id, date: day, code: e.code() }),
                }
            }
        }
        report
    }
}

/// Telemetry summary as served, optionally with viewer display names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryView {
    pub snapshot_id: String,
    #[serde(flatten)]
    pub summary: TelemetrySummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viewer_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StatusView {
    pub snapshot_id: String,
    pub version: u32,
    #[serde(flatten)]
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChannelView {
    #[serde(flatten)]
    pub channel: Channel,
    pub postings: Vec<Posting>,
    pub messages: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Resolved {
    pub selection: Selection,
    pub table: Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckpointInfo {
    pub seq: u64,
    pub state_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HubOptions {
    pub clock: Clock,
    pub expose_viewer_names: bool,
}

/// The state plus the journal that produced it.
#[derive(Debug)]
pub struct Hub {
    state: State,
    options: HubOptions,
    journal: Option<Journal>,
    dir: Option<PathBuf>,
    seq: u64,
}

impl Hub {
    /// A hub that keeps nothing on disk.
    pub fn in_memory(options: HubOptions) -> Self {
        Hub { state: State::default(), options, journal: None, dir: None, seq: 0 }
    }

    /// Opens a data directory, recovering from the checkpoint if any and
    /// replaying the journal records after it.
    pub fn open(dir: &Path, options: HubOptions) -> Result<Self, HubError> {
        let (journal, records) = Journal::open(dir)?;
        let (mut state, start) = match journal::read_checkpoint(dir)? {
            Some(cp) if cp.seq as usize > records.len() => {
                return Err(HubError::JournalCorrupt {
                    seq: records.len() as u64 + 1,
                    reason: format!("checkpoint at seq {} is ahead of the journal", cp.seq),
                })
            }
            Some(cp) => (cp.state, cp.seq as usize),
            None => (State::default(), 0),
        };
        replay_onto(&mut state, &records[start..])?;
        let seq = records.len() as u64;
        Ok(Hub { state, options, journal: Some(journal), dir: Some(dir.to_owned()), seq })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn options(&self) -> &HubOptions {
        &self.options
    }

    /// Number of commands applied so far.
    pub fn seq(&self) -> u64 {
        self.seq
    }

    pub fn now(&self) -> NaiveDate {
        self.options.clock.now(self.state.today)
    }

    pub fn state_hash(&self) -> String {
        self.state.hash()
    }

    /// Applies a command and appends it to the journal. Failed commands leave
    /// neither state nor journal changed.
    pub fn execute(&mut self, cmd: Command) -> Result<Outcome, HubError> {
        let now = self.now();
        if let Command::Tick { to } = cmd {
            if self.options.clock.mode == ClockMode::Wall {
                return Err(HubError::WallClockMode);
            }
            if to < now {
                return Err(HubError::ClockRegression { now, to });
            }
        }
        self.commit(cmd, now)
    }

    /// Runs the scheduler up to the wall-clock date. Used by the server loop.
    pub fn run_scheduler(&mut self) -> Result<Option<TickReport>, HubError> {
        let now = self.now();
        let from = self.state.today.unwrap_or(now);
        if from >= now {
            return Ok(None);
        }
        match self.commit(Command::Tick { to: now }, from)? {
            Outcome::Tick(r) => Ok(Some(r)),
            _ => unreachable!("tick yields a tick report"),
        }
    }

    fn commit(&mut self, cmd: Command, now: NaiveDate) -> Result<Outcome, HubError> {
        let mut next = self.state.clone();
        let out = next.apply(&cmd, now)?;
        if let Some(j) = &mut self.journal {
            j.append(now, &cmd)?;
        }
        self.state = next;
        self.seq += 1;
        Ok(out)
    }

    /// Writes the materialized state next to the journal.
    pub fn checkpoint(&self) -> Result<CheckpointInfo, HubError> {
        let path = match &self.dir {
            Some(dir) => Some(journal::write_checkpoint(dir, &Checkpoint { seq: self.seq, state: self.state.clone() })?),
            None => None,
        };
        Ok(CheckpointInfo { seq: self.seq, state_hash: self.state_hash(), path })
    }

    pub fn dashboard(&self, id: &str) -> Result<&Dashboard, HubError> {
        Ok(self.state.catalog.dashboard(id)?)
    }

    pub fn user(&self, id: &str) -> Result<&User, HubError> {
        Ok(self.state.platform.user(id)?)
    }

    pub fn resolve(
        &self,
        dashboard_id: &str,
        widget_id: &str,
        overrides: &SelectionOverrides,
    ) -> Result<Resolved, HubError> {
        let catalog = &self.state.catalog;
        let selection = extract_selection(catalog.dashboard(dashboard_id)?, widget_id, overrides, catalog)?;
        let table = resolve_selection(&selection, catalog)?;
        Ok(Resolved { selection, table })
    }

    pub fn versions(&self, id: &str) -> Result<Vec<VersionView>, HubError> {
        Ok(self.state.snapshots.version_history(id, self.now())?)
    }

    pub fn status(&self, id: &str) -> Result<StatusView, HubError> {
        let v = self.state.snapshots.get(id)?.latest();
        Ok(StatusView { snapshot_id: id.to_owned(), version: v.version, status: compute_status(v, self.now()) })
    }

    pub fn summary(&self, id: &str, as_of: Option<NaiveDate>) -> Result<SummaryView, HubError> {
        self.state.snapshots.get(id)?;
        let summary = self.state.telemetry.summarize(id, as_of);
        let viewer_names = self.options.expose_viewer_names.then(|| {
            summary
                .viewers
                .iter()
                .map(|v| self.state.platform.user(v).map_or_else(|_| v.clone(), |u| u.display_name.clone()))
                .collect()
        });
        Ok(SummaryView { snapshot_id: id.to_owned(), summary, viewer_names })
    }

    pub fn propagation(&self, id: &str) -> Result<PropagationGraph, HubError> {
        self.state.snapshots.get(id)?;
        Ok(propagation(self.state.platform.postings_of(id))?)
    }

    pub fn home(&self, creator_id: &str) -> Result<Vec<HomeFeedEntry>, HubError> {
        self.state.platform.user(creator_id)?;
        Ok(home_feed(creator_id, self.now(), &self.state.snapshots, &self.state.telemetry))
    }

    pub fn channel(&self, id: &str) -> Result<ChannelView, HubError> {
        let channel = self.state.platform.channel(id)?.clone();
        let (postings, messages) = self.state.platform.channel_feed(id);
        Ok(ChannelView {
            channel,
            postings: postings.into_iter().cloned().collect(),
            messages: messages.into_iter().cloned().collect(),
        })
    }

    pub fn ctx(&self) -> Ctx<'_> {
        self.state.ctx()
    }
}

/// Rebuilds state from journal records, failing on the first record that
/// does not parse or does not apply.
pub fn replay_onto(state: &mut State, records: &[journal::Record]) -> Result<(), HubError> {
    for r in records {
        let cmd = r.command()?;
        state.apply(&cmd, r.at).map_err(|e| HubError::JournalCorrupt { seq: r.seq, reason: e.to_string() })?;
    }
    Ok(())
}

/// Replays a whole journal file from empty state.
pub fn replay_file(path: &Path) -> Result<State, HubError> {
    let records = journal::read_records(path)?;
    let mut state = State::default();
    replay_onto(&mut state, &records)?;
    Ok(state)
}
