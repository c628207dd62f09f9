//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines reach stdout uncaptured.

#[path = "../../core/tests/support/mod.rs"]
mod support;
#[path = "../../service/tests/support/mod.rs"]
mod svc;

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Child, Command as Process, ExitCode, Stdio};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use aho_corasick::AhoCorasick;
use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};
use snapshot_hub_cli::SnapshotSpecFile;
use snapshot_hub_core::collab::{ReactionTarget, View};
use snapshot_hub_core::snapshot::{compute_status, SnapshotVersion, Trigger};
use snapshot_hub_core::telemetry::propagation;
use snapshot_hub_core::template::SizeClass;
use snapshot_hub_core::timeframe::{bucketize, BucketPolicy, DateRange, Span, TimeFrame, TimeUnit};
use snapshot_hub_service::hub::replay_file;
use snapshot_hub_service::journal::JOURNAL_FILE;
use snapshot_hub_service::{Command, Hub, HubError, Outcome, State};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("template coverage", templates),
        ("aggregation oracle", aggregation),
        ("time-frame suite", timeframes),
        ("lifecycle", lifecycle),
        ("scheduler", scheduler),
        ("governance leak test", governance),
        ("telemetry", telemetry),
        ("cli/api equivalence", cli_api_equivalence),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut out = std::io::stdout().lock();
    for (name, check) in criteria {
        let t = Instant::now();
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => writeln!(out, "PASS  {name}: {detail} [{secs:.1}s]").unwrap(),
            Err(reason) => {
                failed += 1;
                writeln!(out, "FAIL  {name}: {reason} [{secs:.1}s]").unwrap()
            }
        }
    }
    writeln!(out, "acceptance: {} passed, {failed} failed", criteria.len() - failed).unwrap();
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn templates() -> Verdict {
    let catalog = support::catalog();
    let cases = support::cases();
    let kinds: BTreeSet<_> = cases.iter().map(|c| c.kind).collect();
    ensure(kinds.len() == 8, || format!("{} distinct template kinds", kinds.len()))?;
    for c in &cases {
        let first = support::golden_text(&support::render(c, &catalog));
        support::check_golden(c.name, &first)?;
        let again = support::golden_text(&support::render(c, &catalog));
        ensure(first == again, || format!("{}: second render differs", c.name))?;
    }
    Ok(format!("{} kinds match their golden files byte for byte, twice", kinds.len()))
}

fn aggregation() -> Verdict {
    use support::agg_oracle::*;
    let mut groups = 0;
    for seed in 0..200u64 {
        let case = random_case(&mut ChaCha8Rng::seed_from_u64(seed));
        ensure(case.ds.rows.len() <= 1000 && case.group_by.len() <= 4, || format!("seed {seed}: case too large"))?;
        let actual = groups_of(&run(&case));
        agrees(&actual, &brute_force(&case)).map_err(|e| format!("seed {seed}: {e}"))?;
        groups += actual.len();
    }
    Ok(format!("200 datasets agree with the nested-loop oracle ({groups} groups, 1e-9 relative)"))
}

fn timeframes() -> Verdict {
    let d = support::date;
    let june = TimeFrame::new("d", d("2023-06-12"), Span::new(1, TimeUnit::Month), TimeUnit::Day).unwrap().resolve_range();
    ensure((june.start, june.end) == (d("2023-06-12"), d("2023-07-12")), || format!("june frame {june:?}"))?;
    let april = DateRange::new(d("2022-04-01"), d("2022-05-01")).unwrap();
    let weeks = bucketize(april, TimeUnit::Week, BucketPolicy::AnchorAligned).unwrap();
    ensure(weeks.len() == 5, || format!("{} weekly buckets", weeks.len()))?;
    ensure((weeks[4].range.start, weeks[4].range.end) == (d("2022-04-29"), d("2022-05-01")), || format!("5th bucket {:?}", weeks[4]))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..1000 {
        let anchor = d("2010-01-01") + chrono::Duration::days(rng.gen_range(0..365 * 20));
        let unit = *TimeUnit::ALL.choose(&mut rng).unwrap();
        let tf = TimeFrame::new("d", anchor, Span::new(rng.gen_range(1..4), unit), TimeUnit::Day).unwrap();
        let now = anchor + chrono::Duration::days(rng.gen_range(-60..1500));
        let next = tf.advance(now);
        let why = |what: &str| format!("pair {i} ({tf:?}, {now}): {what}");
        ensure(next.anchor == support::grid_walk_anchor(&tf, now), || why("differs from the grid walk"))?;
        ensure(next.span == tf.span && next.bucket_unit == tf.bucket_unit, || why("span changed"))?;
        ensure(next == tf || next.resolve_range().end <= now, || why("ends after now"))?;
        ensure(next.advance(now) == next, || why("not idempotent"))?;
    }
    Ok("month range and 5 weekly buckets exact; 1000 advance pairs match the grid walk".into())
}

fn base_hub(start: &str) -> Hub {
    let mut hub = Hub::in_memory(svc::options(start));
    svc::run(
        &mut hub,
        [
            svc::ingest("sales"),
            svc::ingest("tickets"),
            svc::dashboard(),
            svc::user("ana", &["sales", "tickets"]),
            svc::user("bo", &["sales", "tickets"]),
            svc::channel("sales-team", &["ana", "bo"]),
        ],
    );
    hub
}

fn lifecycle() -> Verdict {
    let mut hub = base_hub("2022-05-01");
    let spec = SnapshotSpecFile::load(&svc::fixtures_dir().join("demo-snapshot.json")).map_err(|e| e.to_string())?;
    let v1 = spec.create(&mut hub).map_err(|e| e.to_string())?;
    let annotated = v1.components.iter().map(|c| c.annotations.len()).sum::<usize>();
    ensure(annotated > 0, || "v1 carries no annotation to drop".into())?;
    let h1 = v1.hash();
    svc::run(&mut hub, [svc::tick("2022-06-01")]);
    let h2 = hub.state().snapshots.version("snap-1", 2).map_err(|e| e.to_string())?.hash();
    svc::run(&mut hub, [svc::tick("2022-07-01")]);

    let history = hub.versions("snap-1").map_err(|e| e.to_string())?;
    ensure(history.len() == 3, || format!("{} versions", history.len()))?;
    ensure(history[0].hash == h1 && history[1].hash == h2, || "an earlier version hash changed".into())?;
    for v in &history[1..] {
        let n: usize = v.version.components.iter().map(|c| c.annotations.len()).sum();
        ensure(n == 0, || format!("v{} has {n} annotations", v.version.version))?;
    }
    for v in &history {
        let fd = v.version.freshness_date.ok_or("no freshness date")?;
        let before = compute_status(&v.version, fd.pred_opt().unwrap());
        let at = compute_status(&v.version, fd);
        ensure(!before.is_stale() && at.is_stale(), || format!("v{} does not flip at {fd}", v.version.version))?;
    }
    Ok(format!("3 versions, v1/v2 hashes pinned, v2/v3 unannotated, stale from {}", history[2].version.freshness_date.unwrap()))
}

fn scheduled(hub: &mut Hub, count: u32, unit: &str, anchor: &str, cmp: &str) {
    let c = svc::component_over("ana", "sales-trend", "time-series", "order_date", anchor, (count, unit));
    svc::run(hub, [c, svc::compose("ana", &[cmp], Some((count, unit)))]);
}

fn scheduler() -> Verdict {
    let build = || {
        let mut hub = base_hub("2022-05-01");
        scheduled(&mut hub, 1, "day", "2022-04-30", "cmp-1");
        scheduled(&mut hub, 2, "week", "2022-04-17", "cmp-2");
        hub
    };
    let mut hub = build();
    let report = match hub.execute(svc::tick("2022-05-29")).map_err(|e| e.to_string())? {
        Outcome::Tick(r) => r,
        other => return Err(format!("unexpected outcome {other:?}")),
    };
    let count = |id: &str| report.performed.iter().filter(|p| p.snapshot_id == id).count();
    let (daily, biweekly) = (count("snap-1"), count("snap-2"));
    ensure((daily, biweekly) == (28, 2), || format!("{daily} daily and {biweekly} biweekly updates"))?;
    ensure(report.skipped.is_empty(), || format!("skipped {:?}", report.skipped))?;

    let mut stepwise = build();
    for day in 2..=29 {
        svc::run(&mut stepwise, [svc::tick(&format!("2022-05-{day:02}"))]);
    }
    ensure(stepwise.state_hash() == hub.state_hash(), || "28 one-day ticks differ from one 28-day tick".into())?;
    Ok(format!("{daily} daily and {biweekly} biweekly updates over 28 days; stepwise ticks agree"))
}

/// Matcher for the data values that must never reach a viewer without grants.
fn fixture_secrets() -> &'static AhoCorasick {
    static SECRETS: OnceLock<AhoCorasick> = OnceLock::new();
    SECRETS.get_or_init(|| {
        let mut out = BTreeSet::new();
        for name in ["sales.csv", "tickets.csv"] {
            for line in support::fixture_text(name).lines().skip(1) {
                for cell in line.split(',') {
                    if cell.parse::<NaiveDate>().is_ok() {
                        continue;
                    }
                    out.insert(cell.to_owned());
                    if let Ok(x) = cell.parse::<f64>() {
                        out.insert(x.to_string());
                    }
                }
            }
        }
        out.retain(|s| s.len() >= 4);
        AhoCorasick::new(out).unwrap()
    })
}

fn leaves(v: &Json, out: &mut BTreeSet<String>) {
    match v {
        Json::String(s) => {
            out.insert(s.clone());
        }
        Json::Number(n) => {
            out.insert(n.to_string());
        }
        Json::Array(a) => a.iter().for_each(|x| leaves(x, out)),
        Json::Object(o) => o.values().for_each(|x| leaves(x, out)),
        _ => {}
    }
}

/// Values a rendering of `v` shows: inline data, caption statistics and
/// the numerals of caption text.
fn version_secrets(v: &SnapshotVersion) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for c in &v.components {
        if let Some(spec) = &c.chart_spec {
            leaves(&serde_json::to_value(&spec.inline_data).unwrap(), &mut out);
        }
        if let Some(caption) = &c.caption {
            leaves(&serde_json::to_value(&caption.stats).unwrap(), &mut out);
            for word in caption.text.split_whitespace() {
                let w = word.trim_matches(|ch: char| !ch.is_ascii_digit());
                if w.chars().any(|ch| ch.is_ascii_digit()) {
                    out.insert(w.to_owned());
                }
            }
        }
    }
    out.retain(|s| s.len() >= 4 && s.parse::<NaiveDate>().is_err());
    out
}

fn leaked(text: &str, secrets: &BTreeSet<String>) -> Option<String> {
    if let Some(m) = fixture_secrets().find(text) {
        return Some(text[m.range()].to_owned());
    }
    secrets.iter().find(|s| text.contains(s.as_str())).cloned()
}

#[derive(Default)]
struct SessionReport {
    ops: usize,
    guarded: usize,
    leaks: Vec<String>,
    rendered: usize,
    undetected: Vec<String>,
    forbidden_reshares: usize,
    accepted_forbidden: Vec<String>,
    view_counts: Vec<(u64, u64)>,
    broken_graphs: Vec<String>,
    graphs: usize,
}

const USERS: [&str; 4] = ["ana", "bo", "cy", "dee"];
const CHANNELS: [&str; 3] = ["sales-team", "exec", "ops"];
const SNAPSHOTS: [&str; 4] = ["snap-1", "snap-2", "snap-3", "snap-4"];

fn control(component: &str, id: &str, values: &[&str]) -> Command {
    svc::cmd(json!({"kind": "add-control", "body": {"componentId": component, "control": {
        "id": id, "field": id, "allowedValues": values, "defaultValue": values[0], "isCallToAction": id == "region"
    }}}))
}

fn reshareable(mut c: Command, flag: bool) -> Command {
    if let Command::Compose { request, .. } = &mut c {
        request.reshareable = flag;
    }
    c
}

/// Two datasets, four users of whom cy and dee hold no grants, three
/// channels and four posted-to-be snapshots, two of them not reshareable.
fn governance_setup() -> Vec<Command> {
    vec![
        svc::ingest("sales"),
        svc::ingest("tickets"),
        svc::dashboard(),
        svc::user("ana", &["sales", "tickets"]),
        svc::user("bo", &["sales", "tickets"]),
        svc::user("cy", &[]),
        svc::user("dee", &[]),
        svc::channel("sales-team", &USERS),
        svc::cmd(json!({"kind": "add-channel", "body": {"id": "exec", "name": "exec", "visibility": "private", "members": ["ana", "bo", "cy"]}})),
        svc::channel("ops", &["ana", "bo", "dee"]),
        svc::component("ana", "sales-by-region", "categorical-breakdown", "order_date", "2022-04-01"),
        control("cmp-1", "region", &["Atlantis", "Borealis", "Cascadia"]),
        reshareable(svc::compose("ana", &["cmp-1"], Some((1, "month"))), true),
        svc::component("bo", "tickets-by-team", "categorical-breakdown", "opened", "2022-04-01"),
        control("cmp-2", "team", &["Helpdesk Alpha", "Helpdesk Omega"]),
        reshareable(svc::compose("bo", &["cmp-2"], Some((1, "month"))), false),
        svc::component("ana", "sales-trend", "time-series", "order_date", "2022-04-01"),
        reshareable(svc::compose("ana", &["cmp-3"], Some((1, "month"))), false),
        svc::component("bo", "tickets-by-team", "categorical-breakdown", "opened", "2022-04-01"),
        svc::component("bo", "sales-by-region", "categorical-breakdown", "order_date", "2022-04-01"),
        reshareable(svc::compose("bo", &["cmp-4", "cmp-5"], Some((1, "month"))), true),
    ]
}

/// The version behind a posting, if both exist.
fn posted(st: &State, posting: &str) -> Option<Arc<SnapshotVersion>> {
    let p = st.platform.posting(posting).ok()?;
    st.snapshots.version(&p.snapshot_id, p.version).ok().cloned()
}

fn random_op(rng: &mut ChaCha8Rng, st: &State, now: NaiveDate, requests: u64) -> Command {
    let user = USERS.choose(rng).unwrap().to_string();
    let postings = st.platform.postings().count() as u64;
    let posting = format!("post-{}", rng.gen_range(1..=postings.max(1)));
    let size = *[SizeClass::Narrow, SizeClass::Medium, SizeClass::Wide].choose(rng).unwrap();
    let channel = CHANNELS.choose(rng).unwrap().to_string();
    let snapshot = SNAPSHOTS.choose(rng).unwrap().to_string();
    match rng.gen_range(0..13) {
        0 | 1 => Command::Post { snapshot_id: snapshot, version: None, channel_id: channel, author_id: user },
        2 | 3 => Command::Reshare { posting_id: posting, channel_id: channel, actor_id: user },
        4..=6 => Command::View { posting_id: posting, viewer_id: user, size },
        7 => {
            let (control_id, values) = if rng.gen_bool(0.5) {
                ("region", ["Atlantis", "Cascadia", "Nowhere"])
            } else {
                ("team", ["Helpdesk Alpha", "Helpdesk Omega", "Nobody"])
            };
            let value = serde_json::from_value(json!(values.choose(rng).unwrap())).unwrap();
            Command::Interact { posting_id: posting, viewer_id: user, control_id: control_id.into(), value, size }
        }
        8 => Command::React { target: ReactionTarget::Posting(posting), user_id: user, emoji: "tada".into() },
        9 => Command::Comment {
            channel_id: channel,
            user_id: user,
            text: ["looks right", "why the dip?", "+1"].choose(rng).unwrap().to_string(),
            thread_parent: rng.gen_bool(0.5).then_some(posting),
        },
        10 => Command::RequestAccess { posting_id: posting, requester_id: user },
        11 => Command::DecideAccess {
            request_id: format!("req-{}", rng.gen_range(1..=requests.max(1))),
            creator_id: ["ana", "bo"].choose(rng).unwrap().to_string(),
            decision: serde_json::from_value(json!(["grant", "deny"].choose(rng).unwrap())).unwrap(),
        },
        _ if rng.gen_bool(0.5) => Command::Update { snapshot_id: snapshot, trigger: Trigger::Manual, actor_id: user },
        _ => Command::Tick { to: now + chrono::Duration::days(rng.gen_range(1..12)) },
    }
}

fn response_text(out: &Result<Outcome, HubError>) -> String {
    match out {
        Ok(o) => serde_json::to_string(o).unwrap(),
        Err(e) => e.body().to_string(),
    }
}

/// Drives one randomized session against `hub` and checks every response
/// given to a viewer without grants, every refused reshare and the
/// telemetry invariants after each step.
fn session(seed: u64, hub: &mut Hub) -> SessionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SessionReport::default();
    svc::run(hub, governance_setup());
    let mut requests = 0;
    for _ in 0..rng.gen_range(15..45) {
        let cmd = random_op(&mut rng, hub.state(), hub.now(), requests);
        report.ops += 1;
        let (guarded, forbidden) = {
            let st = hub.state();
            match &cmd {
                Command::View { posting_id, viewer_id, .. }
                | Command::Interact { posting_id, viewer_id, .. }
                | Command::RequestAccess { posting_id, requester_id: viewer_id } => {
                    (posted(st, posting_id).filter(|v| !st.platform.authorized(viewer_id, v)), false)
                }
                Command::Reshare { posting_id, .. } => (None, posted(st, posting_id).is_some_and(|v| !v.reshareable)),
                _ => (None, false),
            }
        };
        let kind = cmd.kind();
        let out = hub.execute(cmd.clone());
        if let Ok(Outcome::Access(r)) = &out {
            requests = requests.max(r.id.trim_start_matches("req-").parse().unwrap_or(0));
        }
        if let Some(v) = guarded {
            report.guarded += 1;
            let text = response_text(&out);
            if let Some(s) = leaked(&text, &version_secrets(&v)) {
                report.leaks.push(format!("seed {seed}: {kind} exposed {s:?}"));
            }
            if matches!(out, Ok(Outcome::View(View::Rendered(_)))) {
                report.leaks.push(format!("seed {seed}: {kind} rendered for an unauthorized viewer"));
            }
        }
        if let Ok(Outcome::View(View::Rendered(r))) = &out {
            // positive control: the detector must see data in a real rendering
            report.rendered += 1;
            let v = hub.state().snapshots.version(&r.snapshot_id, r.version).unwrap();
            if leaked(&response_text(&out), &version_secrets(v)).is_none() {
                report.undetected.push(format!("seed {seed}: {kind} on {}", r.posting_id));
            }
        }
        if forbidden {
            report.forbidden_reshares += 1;
            if out.is_ok() {
                report.accepted_forbidden.push(format!("seed {seed}: {cmd:?}"));
            }
        }
        if rng.gen_bool(0.2) {
            for ch in CHANNELS {
                let text = serde_json::to_string(&hub.channel(ch).unwrap()).unwrap();
                if let Some(s) = leaked(&text, &BTreeSet::new()) {
                    report.leaks.push(format!("seed {seed}: channel {ch} exposed {s:?}"));
                }
            }
        }
        let st = hub.state();
        for id in SNAPSHOTS {
            let s = st.telemetry.summarize(id, None);
            report.view_counts.push((s.unique_viewers, s.views));
            report.graphs += 1;
            if let Err(e) = forest(st, id) {
                report.broken_graphs.push(format!("seed {seed}: {id}: {e}"));
            }
        }
    }
    report
}

/// Checks that the reshare graph of a snapshot is a forest.
fn forest(st: &State, id: &str) -> Result<(), String> {
    let g = propagation(st.platform.postings_of(id)).map_err(|e| e.to_string())?;
    if g.edges.len() != g.nodes.len() - g.roots.len() {
        return Err(format!("{} edges for {} nodes and {} roots", g.edges.len(), g.nodes.len(), g.roots.len()));
    }
    let parent: std::collections::BTreeMap<&str, &str> = g.edges.iter().map(|e| (e.child.as_str(), e.parent.as_str())).collect();
    if parent.len() != g.edges.len() {
        return Err("a posting has two parents".into());
    }
    for n in &g.nodes {
        let mut cur = n.posting_id.as_str();
        let mut steps = 0;
        while let Some(p) = parent.get(cur) {
            cur = p;
            steps += 1;
            if steps > g.nodes.len() {
                return Err(format!("cycle through {}", n.posting_id));
            }
        }
        if !g.roots.iter().any(|r| r == cur) {
            return Err(format!("{} does not reach a root", n.posting_id));
        }
    }
    Ok(())
}

fn sessions() -> &'static Vec<SessionReport> {
    static RUNS: OnceLock<Vec<SessionReport>> = OnceLock::new();
    RUNS.get_or_init(|| {
        (0..500)
            .map(|seed| {
                let mut hub = Hub::in_memory(svc::options("2022-05-01"));
                session(seed, &mut hub)
            })
            .collect()
    })
}

fn governance() -> Verdict {
    let runs = sessions();
    let leaks: Vec<&String> = runs.iter().flat_map(|r| &r.leaks).collect();
    ensure(leaks.is_empty(), || format!("{} leaks, first: {}", leaks.len(), leaks[0]))?;
    let accepted: Vec<&String> = runs.iter().flat_map(|r| &r.accepted_forbidden).collect();
    ensure(accepted.is_empty(), || format!("{} forbidden reshares accepted, first: {}", accepted.len(), accepted[0]))?;
    let undetected: Vec<&String> = runs.iter().flat_map(|r| &r.undetected).collect();
    ensure(undetected.is_empty(), || format!("detector missed data in {} renderings, first: {}", undetected.len(), undetected[0]))?;
    let rendered: usize = runs.iter().map(|r| r.rendered).sum();
    let guarded: usize = runs.iter().map(|r| r.guarded).sum();
    let forbidden: usize = runs.iter().map(|r| r.forbidden_reshares).sum();
    ensure(guarded > 0 && forbidden > 0, || "the sessions never exercised the checks".into())?;
    let ops: usize = runs.iter().map(|r| r.ops).sum();
    Ok(format!("500 sessions, {ops} operations, {guarded} unauthorized responses clean ({rendered} authorized renderings all flagged), {forbidden} forbidden reshares refused"))
}

fn telemetry() -> Verdict {
    let runs = sessions();
    let bad = runs.iter().flat_map(|r| &r.view_counts).filter(|(u, t)| u > t).count();
    ensure(bad == 0, || format!("{bad} summaries with more unique viewers than views"))?;
    let broken: Vec<&String> = runs.iter().flat_map(|r| &r.broken_graphs).collect();
    ensure(broken.is_empty(), || format!("{} broken graphs, first: {}", broken.len(), broken[0]))?;
    let graphs: usize = runs.iter().map(|r| r.graphs).sum();

    for seed in 0..20 {
        let dir = tempfile::tempdir().unwrap();
        let live = {
            let mut hub = Hub::open(dir.path(), svc::options("2022-05-01")).map_err(|e| e.to_string())?;
            session(seed, &mut hub);
            hub.state().clone()
        };
        let replayed = replay_file(&dir.path().join(JOURNAL_FILE)).map_err(|e| e.to_string())?;
        ensure(replayed.hash() == live.hash(), || format!("seed {seed}: replay hash differs"))?;
        for id in SNAPSHOTS {
            ensure(replayed.telemetry.summarize(id, None) == live.telemetry.summarize(id, None), || format!("seed {seed}: {id} summary differs"))?;
            let g = |s: &State| propagation(s.platform.postings_of(id)).ok();
            ensure(g(&replayed) == g(&live), || format!("seed {seed}: {id} graph differs"))?;
        }
        let reopened = Hub::open(dir.path(), svc::options("2022-05-01")).map_err(|e| e.to_string())?;
        ensure(reopened.state_hash() == live.hash(), || format!("seed {seed}: restart hash differs"))?;
    }
    let restarts = kill_restart()?;
    Ok(format!("unique <= total on {} summaries, {graphs} graphs are forests, 20 replays identical, {restarts}", runs[0].view_counts.len() * runs.len()))
}

struct Call {
    method: &'static str,
    path: String,
    user: Option<&'static str>,
    body: String,
}

fn call(method: &'static str, path: impl Into<String>, user: Option<&'static str>, body: Json) -> Call {
    let body = if body.is_null() { String::new() } else { body.to_string() };
    Call { method, path: path.into(), user, body }
}

fn fixture_json(name: &str) -> Json {
    serde_json::from_str(&std::fs::read_to_string(svc::fixtures_dir().join(name)).unwrap()).unwrap()
}

fn ingest_call(id: &str) -> Call {
    let source = std::fs::read_to_string(svc::fixtures_dir().join(format!("{id}.csv"))).unwrap();
    call("POST", "/datasets", None, json!({"id": id, "format": "csv", "source": source}))
}

/// A fixture session over HTTP: setup, a monthly and a daily snapshot, then
/// twelve days of views, interactions, reactions and ticks.
fn http_session() -> Vec<Call> {
    let frame = |anchor: &str, unit: &str| json!({"temporalField": "order_date", "anchor": anchor, "span": {"count": 1, "unit": unit}, "bucketUnit": "day"});
    let mut calls = vec![
        ingest_call("sales"),
        ingest_call("tickets"),
        call("POST", "/dashboards", None, fixture_json("demo-dashboard.json")),
        call("POST", "/users", None, json!({"id": "ana", "displayName": "Ana", "datasetGrants": ["sales"]})),
        call("POST", "/users", None, json!({"id": "bo", "displayName": "Bo", "datasetGrants": ["sales"]})),
        call("POST", "/users", None, json!({"id": "cy", "displayName": "Cy"})),
        call("POST", "/channels", None, json!({"id": "sales-team", "name": "Sales", "visibility": "public", "members": ["ana", "bo", "cy"]})),
        call("POST", "/channels", None, json!({"id": "ops", "name": "Ops", "visibility": "public", "members": ["bo"]})),
        call("POST", "/components", Some("ana"), json!({"dashboardId": "ops", "widgetId": "sales-by-region", "overrides": {"timeFrame": frame("2022-04-01", "month")}, "templateKind": "categorical-breakdown"})),
        call("POST", "/components/cmp-1/controls", None, json!({"id": "region", "field": "region", "allowedValues": ["Atlantis", "Borealis"], "defaultValue": "Atlantis", "isCallToAction": true})),
        call("POST", "/snapshots", Some("ana"), json!({"componentIds": ["cmp-1"], "curation": {"method": "stack"}, "targetChannelId": "sales-team", "policy": {"mode": "interval", "every": {"count": 1, "unit": "month"}}, "reshareable": true})),
        call("POST", "/components", Some("ana"), json!({"dashboardId": "ops", "widgetId": "sales-trend", "overrides": {"timeFrame": frame("2022-04-30", "day")}, "templateKind": "time-series"})),
        call("POST", "/snapshots", Some("ana"), json!({"componentIds": ["cmp-2"], "curation": {"method": "stack"}, "targetChannelId": "sales-team", "policy": {"mode": "interval", "every": {"count": 1, "unit": "day"}}, "reshareable": true})),
        call("POST", "/postings", Some("ana"), json!({"snapshotId": "snap-1", "channelId": "sales-team"})),
        call("POST", "/postings/post-1/reshare", Some("bo"), json!({"channelId": "ops"})),
    ];
    for day in 1..=12 {
        let region = ["Atlantis", "Borealis"][day % 2];
        calls.push(call("GET", "/postings/post-1/view?size=narrow", Some("bo"), Json::Null));
        calls.push(call("GET", "/postings/post-1/view", Some("cy"), Json::Null));
        calls.push(call("POST", "/postings/post-1/interact", Some("bo"), json!({"controlId": "region", "value": region})));
        calls.push(call("POST", "/postings/post-1/reactions", Some(["ana", "bo"][day % 2]), json!({"emoji": "tada"})));
        calls.push(call("POST", "/admin/tick", None, json!({"to": format!("2022-05-{:02}", day + 1)})));
    }
    calls.push(call("POST", "/access-requests", Some("cy"), json!({"postingId": "post-1"})));
    calls.push(call("POST", "/access-requests/req-1/decision", Some("ana"), json!({"decision": "grant"})));
    calls.push(call("GET", "/postings/post-1/view", Some("cy"), Json::Null));
    calls
}

/// Sends one request over a fresh connection and returns status and body.
fn http(port: u16, c: &Call) -> std::io::Result<(u16, String)> {
    let mut s = TcpStream::connect(("127.0.0.1", port))?;
    s.set_read_timeout(Some(Duration::from_secs(30)))?;
    let mut head = format!(
        "{} {} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\nContent-Type: application/json\r\nContent-Length: {}\r\n",
        c.method,
        c.path,
        c.body.len()
    );
    if let Some(u) = c.user {
        head.push_str(&format!("X-User-Id: {u}\r\n"));
    }
    s.write_all(format!("{head}\r\n{}", c.body).as_bytes())?;
    let mut resp = String::new();
    s.read_to_string(&mut resp)?;
    let status = resp.get(9..12).and_then(|x| x.parse().ok()).ok_or_else(|| std::io::Error::other("malformed response"))?;
    let body = resp.split_once("\r\n\r\n").map(|(_, b)| b.to_owned()).unwrap_or_default();
    Ok((status, body))
}

/// The same calls through the router in-process. Returns the state hash
/// after each journaled command (index = seq) and, for each seq, the index
/// of the call after the one that produced it.
fn reference(calls: &[Call]) -> Result<(Vec<String>, Vec<usize>), String> {
    use axum::body::Body;
    use axum::http::Request;
    use tower::ServiceExt;
    let hub = Arc::new(Mutex::new(Hub::in_memory(svc::options("2022-05-01"))));
    let router = snapshot_hub_service::api::router(hub.clone());
    let rt = tokio::runtime::Runtime::new().unwrap();
    let mut hashes = vec![hub.lock().unwrap().state_hash()];
    let mut resume = vec![0];
    for (i, c) in calls.iter().enumerate() {
        let mut req = Request::builder().method(c.method).uri(&c.path).header("content-type", "application/json");
        if let Some(u) = c.user {
            req = req.header("X-User-Id", u);
        }
        let res = rt.block_on(router.clone().oneshot(req.body(Body::from(c.body.clone())).unwrap())).unwrap();
        if !res.status().is_success() {
            return Err(format!("reference call {} {} failed with {}", c.method, c.path, res.status()));
        }
        let hub = hub.lock().unwrap();
        if hub.seq() as usize == hashes.len() {
            hashes.push(hub.state_hash());
            resume.push(i + 1);
        }
    }
    Ok((hashes, resume))
}

struct Server {
    child: Child,
    port: u16,
}

impl Server {
    fn start(dir: &Path) -> Result<Server, String> {
        let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
        let child = Process::new(env!("CARGO_BIN_EXE_snapshot-hub"))
            .arg("--data-dir")
            .arg(dir)
            .args(["--clock", "virtual", "--start-date", "2022-05-01", "serve", "--port", &port.to_string()])
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| e.to_string())?;
        let mut server = Server { child, port };
        let deadline = Instant::now() + Duration::from_secs(20);
        while Instant::now() < deadline {
            if server.state().is_ok() {
                return Ok(server);
            }
            if let Ok(Some(status)) = server.child.try_wait() {
                return Err(format!("server exited with {status}"));
            }
            std::thread::sleep(Duration::from_millis(50));
        }
        server.kill();
        Err("server did not come up".into())
    }

    fn state(&self) -> Result<(usize, String), String> {
        let (status, body) = http(self.port, &call("GET", "/admin/state-hash", None, Json::Null)).map_err(|e| e.to_string())?;
        let v: Json = serde_json::from_str(&body).map_err(|e| format!("{status}: {e}"))?;
        Ok((v["seq"].as_u64().ok_or("no seq")? as usize, v["stateHash"].as_str().ok_or("no hash")?.to_owned()))
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        self.kill();
    }
}

/// Runs the HTTP session against a real server process, SIGKILLs it twice
/// (once between requests, once during a burst) and checks that each
/// restart recovers exactly the journaled prefix.
fn kill_restart() -> Result<String, String> {
    let calls = http_session();
    let (hashes, resume) = reference(&calls)?;
    let dir = tempfile::tempdir().unwrap();

    let mut server = Server::start(dir.path())?;
    let cut = 27;
    for c in &calls[..cut] {
        let (status, body) = http(server.port, c).map_err(|e| e.to_string())?;
        ensure((200..300).contains(&status), || format!("{} {}: {status} {body}", c.method, c.path))?;
    }
    server.kill();
    let mut server = Server::start(dir.path())?;
    let (seq, hash) = server.state()?;
    ensure(resume[seq] == cut, || format!("recovered seq {seq} after {cut} calls"))?;
    ensure(hash == hashes[seq], || format!("restart at seq {seq} differs from the prefix state"))?;

    let port = server.port;
    let rest: Vec<Call> = calls[cut..].iter().map(|c| Call { method: c.method, path: c.path.clone(), user: c.user, body: c.body.clone() }).collect();
    let burst = std::thread::spawn(move || {
        for c in &rest {
            if http(port, c).is_err() {
                break;
            }
        }
    });
    std::thread::sleep(Duration::from_millis(40));
    server.kill();
    burst.join().unwrap();
    let mut server = Server::start(dir.path())?;
    let (mid, hash) = server.state()?;
    ensure(hash == hashes[mid], || format!("restart at seq {mid} differs from the prefix state"))?;
    for c in &calls[resume[mid]..] {
        http(server.port, c).map_err(|e| e.to_string())?;
    }
    let (end, hash) = server.state()?;
    ensure(end == hashes.len() - 1 && hash == hashes[end], || format!("final seq {end} state differs from the uninterrupted session"))?;
    server.kill();
    Ok(format!("kill/restart recovered prefixes at seq {seq} and {mid} of {end}"))
}

fn cli(dir: &Path, args: &[&str]) -> Result<String, String> {
    let out = Process::new(env!("CARGO_BIN_EXE_snapshot-hub"))
        .arg("--data-dir")
        .arg(dir)
        .args(["--start-date", "2022-05-01"])
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).trim().to_owned())
}

fn cli_api_equivalence() -> Verdict {
    let fixture = |name: &str| svc::fixtures_dir().join(name).to_string_lossy().into_owned();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    cli(d, &["ingest", &fixture("sales.csv")])?;
    cli(d, &["ingest", &fixture("tickets.csv")])?;
    cli(d, &["dashboard", &fixture("demo-dashboard.json")])?;
    cli(d, &["user", "ana", "--name", "Ana", "--grant", "sales"])?;
    cli(d, &["user", "bo", "--name", "Bo", "--grant", "sales", "--grant", "tickets"])?;
    cli(d, &["channel", "sales-team", "--name", "Sales", "--member", "ana", "--member", "bo"])?;
    let snapshot = cli(d, &["--as", "ana", "snapshot", "create", &fixture("demo-snapshot.json")])?;
    let cli_state = cli(d, &["state-hash"])?;
    let cli_version = Hub::open(d, svc::options("2022-05-01")).map_err(|e| e.to_string())?.state().snapshots.version(&snapshot, 1).map_err(|e| e.to_string())?.hash();

    let spec = fixture_json("demo-snapshot.json");
    let mut calls = vec![
        ingest_call("sales"),
        ingest_call("tickets"),
        call("POST", "/dashboards", None, fixture_json("demo-dashboard.json")),
        call("POST", "/users", None, json!({"id": "ana", "displayName": "Ana", "datasetGrants": ["sales"]})),
        call("POST", "/users", None, json!({"id": "bo", "displayName": "Bo", "datasetGrants": ["sales", "tickets"]})),
        call("POST", "/channels", None, json!({"id": "sales-team", "name": "Sales", "visibility": "public", "members": ["ana", "bo"]})),
    ];
    let mut ids = Vec::new();
    for (i, c) in spec["components"].as_array().unwrap().iter().enumerate() {
        let id = format!("cmp-{}", i + 1);
        let mut request = c.clone();
        let obj = request.as_object_mut().unwrap();
        let annotations = obj.remove("annotations").unwrap_or(json!([]));
        let controls = obj.remove("controls").unwrap_or(json!([]));
        calls.push(call("POST", "/components", Some("ana"), request));
        for a in annotations.as_array().unwrap() {
            calls.push(call("POST", format!("/components/{id}/annotations"), Some("ana"), a.clone()));
        }
        for k in controls.as_array().unwrap() {
            calls.push(call("POST", format!("/components/{id}/controls"), Some("ana"), k.clone()));
        }
        ids.push(id);
    }
    calls.push(call("POST", "/snapshots", Some("ana"), json!({
        "componentIds": ids, "curation": spec["curation"], "targetChannelId": spec["targetChannelId"],
        "policy": spec["policy"], "reshareable": spec["reshareable"]
    })));
    let (hashes, _) = reference(&calls)?;
    let api_state = hashes.last().unwrap().clone();

    ensure(cli_state == api_state, || format!("state hash {cli_state} via CLI, {api_state} via API"))?;
    let api_version = api_snapshot_hash(&calls, &snapshot)?;
    ensure(cli_version == api_version, || "snapshot version hashes differ".into())?;
    Ok(format!("{snapshot} v1 hash {} and state hash equal on both paths", &cli_version[..12]))
}

fn api_snapshot_hash(calls: &[Call], snapshot: &str) -> Result<String, String> {
    use axum::body::Body;
    use axum::http::Request;
    use http_body_util::BodyExt;
    use tower::ServiceExt;
    let hub = Arc::new(Mutex::new(Hub::in_memory(svc::options("2022-05-01"))));
    let router = snapshot_hub_service::api::router(hub);
    let rt = tokio::runtime::Runtime::new().unwrap();
    let send = |method: &str, path: &str, user: Option<&str>, body: String| {
        let mut req = Request::builder().method(method).uri(path).header("content-type", "application/json");
        if let Some(u) = user {
            req = req.header("X-User-Id", u);
        }
        rt.block_on(async {
            let res = router.clone().oneshot(req.body(Body::from(body)).unwrap()).await.unwrap();
            let status = res.status();
            let bytes = res.into_body().collect().await.unwrap().to_bytes();
            (status, bytes)
        })
    };
    for c in calls {
        let (status, _) = send(c.method, &c.path, c.user, c.body.clone());
        ensure(status.is_success(), || format!("{} {}: {status}", c.method, c.path))?;
    }
    let (_, bytes) = send("GET", &format!("/snapshots/{snapshot}/versions"), None, String::new());
    let versions: Json = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
    versions[0]["hash"].as_str().map(str::to_owned).ok_or_else(|| "no version hash".into())
}
