use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::view::{ComponentView, ObfuscatedView, RenderedView, View};
use super::*;
use crate::data::{Catalog, FilterPredicate, Value};
use crate::snapshot::{compute_status, render_component, SnapshotStore, SnapshotVersion};
use crate::telemetry::{EventKind, NewEvent, Payload, TelemetryLog};
use crate::template::SizeClass;

/// Read access to the rest of the system.
#[derive(Clone, Copy)]
pub struct Ctx<'a> {
    pub catalog: &'a Catalog,
    pub snapshots: &'a SnapshotStore,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Platform {
    users: BTreeMap<String, User>,
    channels: BTreeMap<String, Channel>,
    postings: BTreeMap<String, Posting>,
    messages: BTreeMap<String, Message>,
    reactions: Vec<Reaction>,
    requests: BTreeMap<String, AccessRequest>,
    next_posting: u64,
    next_message: u64,
    next_request: u64,
}

impl Platform {
    pub fn users(&self) -> impl Iterator<Item = &User> {
        self.users.values()
    }

    pub fn user(&self, id: &str) -> Result<&User, CollabError> {
        self.users.get(id).ok_or_else(|| CollabError::UnknownUser(id.to_owned()))
    }

    pub fn channel(&self, id: &str) -> Result<&Channel, CollabError> {
        self.channels.get(id).ok_or_else(|| CollabError::UnknownChannel(id.to_owned()))
    }

    pub fn channels(&self) -> impl Iterator<Item = &Channel> {
        self.channels.values()
    }

    pub fn posting(&self, id: &str) -> Result<&Posting, CollabError> {
        self.postings.get(id).ok_or_else(|| CollabError::UnknownPosting(id.to_owned()))
    }

    pub fn postings(&self) -> impl Iterator<Item = &Posting> {
        self.postings.values()
    }

    pub fn postings_of<'a>(&'a self, snapshot_id: &'a str) -> impl Iterator<Item = &'a Posting> + 'a {
        self.postings.values().filter(move |p| p.snapshot_id == snapshot_id)
    }

    /// Postings and messages of a channel, in creation order.
    pub fn channel_feed(&self, channel_id: &str) -> (Vec<&Posting>, Vec<&Message>) {
        let mut p: Vec<&Posting> = self.postings.values().filter(|p| p.channel_id == channel_id).collect();
        p.sort_by_key(|p| p.seq);
        let mut m: Vec<&Message> = self.messages.values().filter(|m| m.channel_id == channel_id).collect();
        m.sort_by_key(|m| id_number(&m.id));
        (p, m)
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn request(&self, id: &str) -> Result<&AccessRequest, CollabError> {
        self.requests.get(id).ok_or_else(|| CollabError::UnknownRequest(id.to_owned()))
    }

    pub fn add_user(&mut self, user: User, catalog: &Catalog) -> Result<User, CollabError> {
        if user.id.trim().is_empty() {
            return Err(CollabError::UnknownUser(user.id));
        }
        if self.users.contains_key(&user.id) {
            return Err(CollabError::DuplicateUser(user.id));
        }
        if let Some(d) = user.dataset_grants.iter().find(|d| catalog.dataset(d).is_err()) {
            return Err(CollabError::UnknownDataset(d.clone()));
        }
        self.users.insert(user.id.clone(), user.clone());
        Ok(user)
    }

    pub fn add_channel(&mut self, channel: Channel) -> Result<Channel, CollabError> {
        if channel.id.trim().is_empty() {
            return Err(CollabError::InvalidChannel("channel id is empty".into()));
        }
        if self.channels.contains_key(&channel.id) {
            return Err(CollabError::DuplicateChannel(channel.id));
        }
        if channel.visibility == Visibility::Private && channel.members.is_empty() {
            return Err(CollabError::InvalidChannel("a private channel needs a member".into()));
        }
        for m in &channel.members {
            self.user(m)?;
        }
        self.channels.insert(channel.id.clone(), channel.clone());
        Ok(channel)
    }

    /// Adds `user_id` to a channel. Anyone may join a public channel; private
    /// channels take new members only from existing ones.
    pub fn add_member(&mut self, channel_id: &str, user_id: &str, actor_id: &str) -> Result<Channel, CollabError> {
        self.user(user_id)?;
        let channel = self.channel(channel_id)?;
        if channel.visibility == Visibility::Private && !channel.members.contains(actor_id) {
            return Err(CollabError::NotAMember { user: actor_id.to_owned(), channel: channel_id.to_owned() });
        }
        let channel = self.channels.get_mut(channel_id).expect("looked up above");
        channel.members.insert(user_id.to_owned());
        Ok(channel.clone())
    }

    fn require_member(&self, channel_id: &str, user_id: &str) -> Result<&Channel, CollabError> {
        self.user(user_id)?;
        let c = self.channel(channel_id)?;
        if !c.members.contains(user_id) {
            return Err(CollabError::NotAMember { user: user_id.to_owned(), channel: channel_id.to_owned() });
        }
        Ok(c)
    }

    fn version<'a>(&self, ctx: Ctx<'a>, p: &Posting) -> Result<&'a SnapshotVersion, CollabError> {
        Ok(ctx.snapshots.version(&p.snapshot_id, p.version)?)
    }

    /// Whether `user_id` holds grants for every dataset behind the version.
    pub fn authorized(&self, user_id: &str, v: &SnapshotVersion) -> bool {
        self.users.get(user_id).is_some_and(|u| v.datasets().iter().all(|d| u.dataset_grants.contains(*d)))
    }

    fn new_posting(&mut self, channel_id: &str, author_id: &str, v: &SnapshotVersion, parent: Option<String>, now: NaiveDate) -> Posting {
        self.next_posting += 1;
        let p = Posting {
            id: format!("post-{}", self.next_posting),
            seq: self.next_posting,
            channel_id: channel_id.to_owned(),
            author_id: author_id.to_owned(),
            snapshot_id: v.snapshot_id.clone(),
            version: v.version,
            parent_posting_id: parent,
            posted_at: now,
        };
        self.postings.insert(p.id.clone(), p.clone());
        p
    }

    #[allow(clippy::too_many_arguments)]
    pub fn post(
        &mut self,
        ctx: Ctx,
        log: &mut TelemetryLog,
        snapshot_id: &str,
        version: u32,
        channel_id: &str,
        author_id: &str,
        now: NaiveDate,
    ) -> Result<Posting, CollabError> {
        self.require_member(channel_id, author_id)?;
        let v = ctx.snapshots.version(snapshot_id, version)?;
        let p = self.new_posting(channel_id, author_id, v, None, now);
        log.record(NewEvent::new(EventKind::Post, author_id, snapshot_id, version, now).on_posting(&p.id, channel_id));
        Ok(p)
    }

    pub fn reshare(
        &mut self,
        ctx: Ctx,
        log: &mut TelemetryLog,
        posting_id: &str,
        target_channel_id: &str,
        actor_id: &str,
        now: NaiveDate,
    ) -> Result<Posting, CollabError> {
        let source = self.posting(posting_id)?.clone();
        self.require_member(&source.channel_id, actor_id)?;
        let v = self.version(ctx, &source)?;
        if !v.reshareable {
            return Err(CollabError::ReshareForbidden(source.snapshot_id));
        }
        self.require_member(target_channel_id, actor_id)?;
        let p = self.new_posting(target_channel_id, actor_id, v, Some(source.id.clone()), now);
        log.record(
            NewEvent::new(EventKind::Reshare, actor_id, &p.snapshot_id, p.version, now)
                .on_posting(&p.id, target_channel_id)
                .with_payload(Payload::Reshare {
                    from_channel: source.channel_id.clone(),
                    to_channel: target_channel_id.to_owned(),
                }),
        );
        Ok(p)
    }

    fn obfuscated(&self, p: &Posting, viewer_id: &str) -> ObfuscatedView {
        let pending = self
            .requests
            .values()
            .any(|r| r.posting_id == p.id && r.requester_id == viewer_id && r.state == AccessState::Pending);
        ObfuscatedView {
            posting_id: p.id.clone(),
            snapshot_id: p.snapshot_id.clone(),
            version: p.version,
            reason: "You do not have access to the data behind this snapshot.".into(),
            request_access_available: !pending,
        }
    }

    /// Renders a posting for a channel member, or an obfuscated stand-in when
    /// the viewer lacks a dataset grant. Either way a view event is logged.
    pub fn view(
        &self,
        ctx: Ctx,
        log: &mut TelemetryLog,
        posting_id: &str,
        viewer_id: &str,
        size: SizeClass,
        now: NaiveDate,
    ) -> Result<View, CollabError> {
        let p = self.posting(posting_id)?;
        self.require_member(&p.channel_id, viewer_id)?;
        let v = self.version(ctx, p)?;
        let event = |kind| NewEvent::new(kind, viewer_id, &p.snapshot_id, p.version, now).on_posting(&p.id, &p.channel_id);
        if !self.authorized(viewer_id, v) {
            log.record(event(EventKind::ObfuscatedView));
            return Ok(View::Obfuscated(self.obfuscated(p, viewer_id)));
        }
        let latest = ctx.snapshots.get(&p.snapshot_id)?.latest().version;
        log.record(event(EventKind::View).with_payload(Payload::View { size }));
        Ok(View::Rendered(RenderedView::of(&p.id, v, latest, size, compute_status(v, now))))
    }

    /// Re-renders the component owning `control_id` with the control's filter
    /// set to `value`. The result goes only to the caller.
    #[allow(clippy::too_many_arguments)]
    pub fn interact(
        &self,
        ctx: Ctx,
        log: &mut TelemetryLog,
        posting_id: &str,
        viewer_id: &str,
        control_id: &str,
        value: &Value,
        size: SizeClass,
        now: NaiveDate,
    ) -> Result<View, CollabError> {
        let p = self.posting(posting_id)?;
        self.require_member(&p.channel_id, viewer_id)?;
        let v = self.version(ctx, p)?;
        if !self.authorized(viewer_id, v) {
            log.record(
                NewEvent::new(EventKind::ObfuscatedView, viewer_id, &p.snapshot_id, p.version, now)
                    .on_posting(&p.id, &p.channel_id),
            );
            return Ok(View::Obfuscated(self.obfuscated(p, viewer_id)));
        }
        let (index, control) = v
            .components
            .iter()
            .enumerate()
            .find_map(|(i, c)| c.control(control_id).map(|k| (i, k)))
            .ok_or_else(|| CollabError::UnknownControl(control_id.to_owned()))?;
        let ds = ctx.catalog.dataset(&v.components[index].selection.dataset_id).map_err(SnapshotError::from)?;
        let field_type = ds.field(&control.field).map(|f| f.value_type);
        let value = field_type.and_then(|t| value.coerce(t)).unwrap_or_else(|| value.clone());
        if !control.allowed_values.contains(&value) {
            return Err(CollabError::InvalidControlValue(control_id.to_owned()));
        }
        let c = &v.components[index];
        let mut sel = c.selection.clone();
        sel.override_filters(&[FilterPredicate::eq(control.field.clone(), value.clone())]);
        let r = render_component(&sel, c.template_kind, &c.params, &c.widget, c.color_scale.as_ref(), ctx.catalog)?;
        let latest = ctx.snapshots.get(&p.snapshot_id)?.latest().version;
        let mut view = RenderedView::of(&p.id, v, latest, size, compute_status(v, now));
        let filtered = crate::snapshot::SnapshotComponent { chart_spec: r.chart, caption: r.caption, ..c.clone() };
        view.components[index] = ComponentView::of(&filtered, size);
        view.private = true;
        log.record(
            NewEvent::new(EventKind::Interaction, viewer_id, &p.snapshot_id, p.version, now)
                .on_posting(&p.id, &p.channel_id)
                .with_payload(Payload::Interaction { control_id: control_id.to_owned(), value: value.to_string() })
                .call_to_action(control.is_call_to_action),
        );
        Ok(View::Rendered(view))
    }

    fn target_channel(&self, target: &ReactionTarget) -> Result<(String, Option<&Posting>), CollabError> {
        match target {
            ReactionTarget::Posting(id) => {
                let p = self.postings.get(id).ok_or_else(|| CollabError::UnknownRef(id.clone()))?;
                Ok((p.channel_id.clone(), Some(p)))
            }
            ReactionTarget::Message(id) => {
                let m = self.messages.get(id).ok_or_else(|| CollabError::UnknownRef(id.clone()))?;
                Ok((m.channel_id.clone(), self.thread_posting(m)))
            }
        }
    }

    /// The posting at the root of a message's thread, if any.
    fn thread_posting(&self, m: &Message) -> Option<&Posting> {
        let mut parent = m.thread_parent.as_deref();
        let mut seen = BTreeSet::new();
        while let Some(id) = parent {
            if !seen.insert(id) {
                return None;
            }
            if let Some(p) = self.postings.get(id) {
                return Some(p);
            }
            parent = self.messages.get(id)?.thread_parent.as_deref();
        }
        None
    }

    /// Adds a reaction. Repeating the same emoji on the same target is a no-op.
    pub fn react(
        &mut self,
        log: &mut TelemetryLog,
        target: ReactionTarget,
        user_id: &str,
        emoji: &str,
        now: NaiveDate,
    ) -> Result<Reaction, CollabError> {
        let (channel_id, posting) = self.target_channel(&target)?;
        self.require_member(&channel_id, user_id)?;
        if emoji.trim().is_empty() {
            return Err(CollabError::EmptyMessage);
        }
        if let Some(r) = self.reactions.iter().find(|r| r.target == target && r.user_id == user_id && r.emoji == emoji) {
            return Ok(r.clone());
        }
        if let Some(p) = posting {
            log.record(
                NewEvent::new(EventKind::Reaction, user_id, &p.snapshot_id, p.version, now)
                    .on_posting(&p.id, &p.channel_id)
                    .with_payload(Payload::Reaction { emoji: emoji.to_owned() }),
            );
        }
        let r = Reaction { target, user_id: user_id.to_owned(), emoji: emoji.to_owned(), at: now };
        self.reactions.push(r.clone());
        Ok(r)
    }

    pub fn comment(
        &mut self,
        log: &mut TelemetryLog,
        channel_id: &str,
        user_id: &str,
        text: &str,
        thread_parent: Option<&str>,
        now: NaiveDate,
    ) -> Result<Message, CollabError> {
        self.require_member(channel_id, user_id)?;
        if text.trim().is_empty() {
            return Err(CollabError::EmptyMessage);
        }
        if let Some(parent) = thread_parent {
            let same_channel = self.postings.get(parent).map(|p| &p.channel_id).or(self.messages.get(parent).map(|m| &m.channel_id));
            if same_channel.map(String::as_str) != Some(channel_id) {
                return Err(CollabError::UnknownRef(parent.to_owned()));
            }
        }
        self.next_message += 1;
        let m = Message {
            id: format!("msg-{}", self.next_message),
            channel_id: channel_id.to_owned(),
            author_id: user_id.to_owned(),
            text: text.to_owned(),
            thread_parent: thread_parent.map(str::to_owned),
            at: now,
        };
        if let Some(p) = self.thread_posting(&m) {
            log.record(
                NewEvent::new(EventKind::Comment, user_id, &p.snapshot_id, p.version, now)
                    .on_posting(&p.id, &p.channel_id)
                    .with_payload(Payload::Comment { message_id: m.id.clone() }),
            );
        }
        self.messages.insert(m.id.clone(), m.clone());
        Ok(m)
    }

    /// Opens (or returns the open) access request of a viewer who was shown
    /// an obfuscated posting.
    pub fn request_access(&mut self, ctx: Ctx, posting_id: &str, requester_id: &str) -> Result<AccessRequest, CollabError> {
        let p = self.posting(posting_id)?;
        self.require_member(&p.channel_id, requester_id)?;
        if self.authorized(requester_id, self.version(ctx, p)?) {
            return Err(CollabError::NotObfuscatedForUser(requester_id.to_owned()));
        }
        if let Some(r) = self
            .requests
            .values()
            .find(|r| r.posting_id == posting_id && r.requester_id == requester_id && r.state == AccessState::Pending)
        {
            return Ok(r.clone());
        }
        self.next_request += 1;
        let r = AccessRequest {
            id: format!("req-{}", self.next_request),
            posting_id: posting_id.to_owned(),
            requester_id: requester_id.to_owned(),
            state: AccessState::Pending,
        };
        self.requests.insert(r.id.clone(), r.clone());
        Ok(r)
    }

    /// The snapshot creator settles a pending request. A grant adds every
    /// dataset of the posted version to the requester.
    pub fn decide_access(&mut self, ctx: Ctx, request_id: &str, creator_id: &str, decision: Decision) -> Result<AccessRequest, CollabError> {
        let r = self.request(request_id)?.clone();
        let p = self.posting(&r.posting_id)?;
        let v = self.version(ctx, p)?;
        if v.creator_id != creator_id {
            return Err(CollabError::NotCreator(creator_id.to_owned()));
        }
        if r.state != AccessState::Pending {
            return Err(CollabError::RequestClosed(request_id.to_owned()));
        }
        let state = match decision {
            Decision::Grant => AccessState::Granted,
            Decision::Deny => AccessState::Denied,
        };
        if state == AccessState::Granted {
            let datasets: Vec<String> = v.datasets().into_iter().map(str::to_owned).collect();
            let user = self.users.get_mut(&r.requester_id).ok_or_else(|| CollabError::UnknownUser(r.requester_id.clone()))?;
            user.dataset_grants.extend(datasets);
        }
        let stored = self.requests.get_mut(request_id).expect("looked up above");
        stored.state = state;
        Ok(stored.clone())
    }
}

fn id_number(id: &str) -> u64 {
    id.rsplit('-').next().and_then(|n| n.parse().ok()).unwrap_or(0)
}
