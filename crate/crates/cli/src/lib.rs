//! Command-line front end. Every subcommand opens the data directory in
//! process, applies the same commands the HTTP API would, and exits.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use snapshot_hub_core::collab::{Channel, User, Visibility};
use snapshot_hub_core::data::{Dashboard, SchemaHint, SourceFormat};
use snapshot_hub_core::snapshot::{
    Annotation, AnnotationTarget, ComponentRequest, ComposeRequest, CurationMethod, InteractivityControl,
    SnapshotVersion, Trigger, UpdatePolicy,
};
use snapshot_hub_service::{ClockMode, Command, Config, Hub, HubError, Outcome};

#[derive(Debug, Parser)]
#[command(name = "snapshot-hub", version, about = "Live, versioned dashboard snapshots")]
pub struct Cli {
    /// Directory holding the journal and checkpoint.
    #[arg(long, global = true, env = "SNAPSHOT_HUB_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    #[arg(long, global = true, default_value = "virtual")]
    pub clock: ClockMode,
    /// First day of a fresh virtual clock. Defaults to today.
    #[arg(long, global = true)]
    pub start_date: Option<NaiveDate>,
    /// Acting user.
    #[arg(long = "as", global = true, value_name = "USER")]
    pub actor: Option<String>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Load a CSV or JSON-records file as a dataset and print its id.
    Ingest(IngestArgs),
    /// Add or replace a dashboard definition.
    Dashboard { file: PathBuf },
    /// Register a user.
    User {
        id: String,
        #[arg(long)]
        name: Option<String>,
        /// Dataset the user may see; repeatable.
        #[arg(long = "grant")]
        grants: Vec<String>,
    },
    /// Create a channel.
    Channel {
        id: String,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        private: bool,
        /// Initial member; repeatable.
        #[arg(long = "member")]
        members: Vec<String>,
    },
    /// Add a user to a channel.
    Member { channel: String, user: String },
    #[command(subcommand)]
    Snapshot(SnapshotCmd),
    /// Post a snapshot version to a channel.
    Post {
        snapshot: String,
        channel: String,
        #[arg(long)]
        version: Option<u32>,
    },
    /// Update a snapshot now.
    Update {
        snapshot: String,
        #[arg(long, default_value = "manual")]
        trigger: String,
    },
    /// Advance the virtual clock, running scheduled updates on the way.
    Tick {
        #[arg(long)]
        to: NaiveDate,
    },
    /// Print a snapshot's telemetry summary and propagation edges.
    Report {
        snapshot: String,
        #[arg(long)]
        as_of: Option<NaiveDate>,
    },
    /// Apply raw commands from a JSON array or JSON-lines file.
    Apply { file: PathBuf },
    /// Write a checkpoint next to the journal.
    Checkpoint,
    /// Print the hash of the materialized state.
    StateHash,
    /// Run the HTTP service on the data directory.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        expose_viewer_names: bool,
    },
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub path: PathBuf,
    /// `csv` or `json-records`; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<String>,
    /// JSON list of fields to use instead of inference.
    #[arg(long)]
    pub schema_hint: Option<PathBuf>,
    /// Dataset id; defaults to the file stem.
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum SnapshotCmd {
    /// Create a snapshot from a spec file and print its id.
    Create { spec: PathBuf },
}

/// One component of a spec file: the `POST /components` body plus the
/// annotation and control bodies that follow it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentSpec {
    #[serde(flatten)]
    pub request: ComponentRequest,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
    #[serde(default)]
    pub controls: Vec<InteractivityControl>,
}

/// Declarative description of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnapshotSpecFile {
    pub creator_id: String,
    pub components: Vec<ComponentSpec>,
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

impl SnapshotSpecFile {
    pub fn load(path: &Path) -> Result<Self, HubError> {
        parse_json(&read(path)?, path)
    }

    /// Creates the components, their annotations and controls, then composes
    /// the snapshot, exactly as the equivalent API calls would.
    pub fn create(&self, hub: &mut Hub) -> Result<Arc<SnapshotVersion>, HubError> {
        let mut ids = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let id = match hub.execute(Command::CreateComponent {
                author_id: self.creator_id.clone(),
                request: c.request.clone(),
            })? {
                Outcome::Component(c) => c.id,
                _ => unreachable!("create-component yields a component"),
            };
            for a in &c.annotations {
                hub.execute(Command::Annotate {
                    target: AnnotationTarget::Draft { component_id: id.clone() },
                    annotation: a.clone(),
                })?;
            }
            for ctl in &c.controls {
                hub.execute(Command::AddControl { component_id: id.clone(), control: ctl.clone() })?;
            }
            ids.push(id);
        }
        let request = ComposeRequest {
            component_ids: ids,
            curation: self.curation.clone(),
            target_channel_id: self.target_channel_id.clone(),
            policy: self.policy,
            reshareable: self.reshareable,
            completeness_note: self.completeness_note.clone(),
        };
        match hub.execute(Command::Compose { creator_id: self.creator_id.clone(), request })? {
            Outcome::Version(v) => Ok(v),
            _ => unreachable!("compose yields a version"),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, HubError> {
    std::fs::read(path).map_err(|e| HubError::Io(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8], path: &Path) -> Result<T, HubError> {
    serde_json::from_slice(bytes).map_err(|e| HubError::BadRequest(format!("{}: {e}", path.display())))
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("outputs serialize")
}

fn format_of(path: &Path, flag: Option<&str>) -> Result<SourceFormat, HubError> {
    let name = match flag {
        Some(f) => f.to_owned(),
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => "csv".into(),
            Some("json") => "json-records".into(),
            _ => return Err(HubError::BadRequest("cannot guess the format; pass --format".into())),
        },
    };
    serde_json::from_value(serde_json::Value::String(name.clone()))
        .map_err(|_| HubError::BadRequest(format!("unknown format `{name}`, expected `csv` or `json-records`")))
}

impl Cli {
    fn config(&self) -> Config {
        Config {
            port: 8080,
            data_dir: self.data_dir.clone(),
            clock: self.clock,
            start_date: self.start_date,
            expose_viewer_names: false,
        }
    }

    fn actor(&self) -> Result<String, HubError> {
        self.actor.clone().ok_or_else(|| HubError::BadRequest("this command needs --as <USER>".into()))
    }

    fn open(&self) -> Result<Hub, HubError> {
        let config = self.config();
        config.validate()?;
        Hub::open(&config.data_dir, config.hub_options())
    }
}

/// Runs every subcommand except `serve` and returns what to print.
pub fn run(cli: &Cli) -> Result<String, HubError> {
    let mut hub = cli.open()?;
    Ok(match &cli.command {
        Cmd::Ingest(a) => {
            let format = format_of(&a.path, a.format.as_deref())?;
            let source = String::from_utf8(read(&a.path)?)
                .map_err(|_| HubError::BadRequest(format!("{} is not UTF-8", a.path.display())))?;
            let schema_hint: Option<SchemaHint> = match &a.schema_hint {
                Some(p) => Some(parse_json(&read(p)?, p)?),
                None => None,
            };
            let id = match &a.id {
                Some(id) => id.clone(),
                None => a.path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_owned(),
            };
            let name = a.name.clone().unwrap_or_else(|| id.clone());
            hub.execute(Command::IngestDataset { id: id.clone(), name, format, source, schema_hint })?;
            id
        }
        Cmd::Dashboard { file } => {
            let d: Dashboard = parse_json(&read(file)?, file)?;
            let id = d.id.clone();
            hub.execute(Command::PutDashboard(d))?;
            id
        }
        Cmd::User { id, name, grants } => {
            let user = User {
                id: id.clone(),
                display_name: name.clone().unwrap_or_else(|| id.clone()),
                dataset_grants: grants.iter().cloned().collect(),
            };
            hub.execute(Command::AddUser(user))?;
            id.clone()
        }
        Cmd::Channel { id, name, private, members } => {
            let channel = Channel {
                id: id.clone(),
                name: name.clone().unwrap_or_else(|| id.clone()),
                visibility: if *private { Visibility::Private } else { Visibility::Public },
                members: members.iter().cloned().collect(),
            };
            hub.execute(Command::AddChannel(channel))?;
            id.clone()
        }
        Cmd::Member { channel, user } => {
            let actor_id = cli.actor()?;
            hub.execute(Command::AddMember { channel_id: channel.clone(), user_id: user.clone(), actor_id })?;
            format!("{user} joined {channel}")
        }
        Cmd::Snapshot(SnapshotCmd::Create { spec }) => {
            let mut spec = SnapshotSpecFile::load(spec)?;
            if let Some(a) = &cli.actor {
                spec.creator_id = a.clone();
            }
            spec.create(&mut hub)?.snapshot_id.clone()
        }
        Cmd::Post { snapshot, channel, version } => {
            let author_id = cli.actor()?;
            match hub.execute(Command::Post {
                snapshot_id: snapshot.clone(),
                version: *version,
                channel_id: channel.clone(),
                author_id,
            })? {
                Outcome::Posting(p) => p.id,
                _ => unreachable!("post yields a posting"),
            }
        }
        Cmd::Update { snapshot, trigger } => {
            let actor_id = cli.actor()?;
            let trigger: Trigger = serde_json::from_value(serde_json::Value::String(trigger.clone()))
                .map_err(|_| HubError::BadRequest(format!("unknown trigger `{trigger}`")))?;
            match hub.execute(Command::Update { snapshot_id: snapshot.clone(), trigger, actor_id })? {
                Outcome::Updated(u) => format!("{} v{}", u.version.snapshot_id, u.version.version),
                _ => unreachable!("update yields a version"),
            }
        }
        Cmd::Tick { to } => pretty(&hub.execute(Command::Tick { to: *to })?),
        Cmd::Report { snapshot, as_of } => report(&hub, snapshot, *as_of)?,
        Cmd::Apply { file } => {
            let bytes = read(file)?;
            let commands: Vec<Command> = if bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'[') {
                parse_json(&bytes, file)?
            } else {
                let text = String::from_utf8_lossy(&bytes);
                text.lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(|l| parse_json(l.as_bytes(), file))
                    .collect::<Result<_, _>>()?
            };
            let outcomes = commands.into_iter().map(|c| hub.execute(c)).collect::<Result<Vec<_>, _>>()?;
            pretty(&outcomes)
        }
        Cmd::Checkpoint => pretty(&hub.checkpoint()?),
        Cmd::StateHash => hub.state_hash(),
        Cmd::Serve { .. } => return Err(HubError::BadRequest("serve runs through `serve`".into())),
    })
}

/// Summary JSON followed by one `parent -> child` line per propagation edge.
pub fn report(hub: &Hub, snapshot: &str, as_of: Option<NaiveDate>) -> Result<String, HubError> {
    let summary = hub.summary(snapshot, as_of)?;
    let graph = hub.propagation(snapshot)?;
    let mut out = pretty(&summary);
    out.push_str(&format!(
        "\npropagation: {} postings, {} edges, {} roots\n",
        graph.nodes.len(),
        graph.edges.len(),
        graph.roots.len()
    ));
    for e in &graph.edges {
        out.push_str(&format!("{} -> {}\n", e.parent, e.child));
    }
    Ok(out.trim_end().to_owned())
}

/// Config for `serve`, taking the subcommand's flags.
pub fn serve_config(cli: &Cli) -> Option<Config> {
    match &cli.command {
        Cmd::Serve { port, expose_viewer_names } => {
            Some(Config { port: *port, expose_viewer_names: *expose_viewer_names, ..cli.config() })
        }
        _ => None,
    }
}
