use serde_json::json;
use snapshot_hub_core::collab::CollabError;
use snapshot_hub_core::data::DataError;
use snapshot_hub_core::snapshot::SnapshotError;
use snapshot_hub_core::telemetry::TelemetryError;
use snapshot_hub_core::template::TemplateError;
use snapshot_hub_core::timeframe::TimeFrameError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HubError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Collab(#[from] CollabError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error("cannot move the clock back from {now} to {to}")]
    ClockRegression { now: chrono::NaiveDate, to: chrono::NaiveDate },
    #[error("the clock follows wall time and cannot be ticked")]
    WallClockMode,
    #[error("journal record {seq} is corrupt: {reason}")]
    JournalCorrupt { seq: u64, reason: String },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("bad request: {0}")]
    BadRequest(String),
}

impl From<std::io::Error> for HubError {
    fn from(e: std::io::Error) -> Self {
        HubError::Io(e.to_string())
    }
}

impl From<TimeFrameError> for HubError {
    fn from(e: TimeFrameError) -> Self {
        HubError::Data(e.into())
    }
}

/// Broad failure class, shared by HTTP statuses and CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Permission,
    NotFound,
    Conflict,
    Io,
}

impl ErrorClass {
    pub fn http_status(self) -> u16 {
        match self {
            ErrorClass::Validation => 400,
            ErrorClass::Permission => 403,
            ErrorClass::NotFound => 404,
            ErrorClass::Conflict => 409,
            ErrorClass::Io => 500,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Validation | ErrorClass::Conflict => 2,
            ErrorClass::Permission => 3,
            ErrorClass::NotFound => 4,
            ErrorClass::Io => 5,
        }
    }
}

fn variant(debug: &str) -> String {
    debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_owned()
}

impl HubError {
    /// Stable machine-readable code: the innermost variant name.
    pub fn code(&self) -> String {
        match self {
            HubError::Data(DataError::TimeFrame(e)) => variant(&format!("{e:?}")),
            HubError::Data(e) => variant(&format!("{e:?}")),
            HubError::Template(e) | HubError::Snapshot(SnapshotError::Template(e)) => variant(&format!("{e:?}")),
            HubError::Snapshot(SnapshotError::Data(e)) => HubError::Data(e.clone()).code(),
            HubError::Snapshot(e) => variant(&format!("{e:?}")),
            HubError::Collab(CollabError::Snapshot(e)) => HubError::Snapshot(e.clone()).code(),
            HubError::Collab(e) => variant(&format!("{e:?}")),
            HubError::Telemetry(e) => variant(&format!("{e:?}")),
            other => variant(&format!("{other:?}")),
        }
    }

    pub fn class(&self) -> ErrorClass {
        let code = self.code();
        match code.as_str() {
            c if c.starts_with("Unknown") => ErrorClass::NotFound,
            "NotAMember" | "ReshareForbidden" | "RefreshNotPermitted" | "NotCreator" | "NotObfuscatedForUser" => {
                ErrorClass::Permission
            }
            "VersionImmutable" | "NothingToUpdate" | "DuplicateUser" | "DuplicateChannel" | "RequestClosed" => {
                ErrorClass::Conflict
            }
            "Io" | "JournalCorrupt" => ErrorClass::Io,
            _ => ErrorClass::Validation,
        }
    }

    /// `{code, message, details}`.
    pub fn body(&self) -> serde_json::Value {
        let details = match self {
            HubError::JournalCorrupt { seq, .. } => json!({ "seq": seq }),
            HubError::ClockRegression { now, to } => json!({ "now": now, "to": to }),
            HubError::Snapshot(SnapshotError::VersionImmutable { snapshot, version }) => {
                json!({ "snapshotId": snapshot, "version": version })
            }
            _ => json!({}),
        };
        json!({ "code": self.code(), "message": self.to_string(), "details": details })
    }
}
