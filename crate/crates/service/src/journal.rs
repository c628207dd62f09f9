//! Append-only JSON-lines command journal and state checkpoints.
//!
//! Each line is `{"seq":n,"at":"YYYY-MM-DD","kind":"...","body":{...}}` with
//! `seq` contiguous from 1.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::command::Command;
use crate::error::HubError;
use crate::hub::State;

pub const JOURNAL_FILE: &str = "journal.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub seq: u64,
    pub at: NaiveDate,
    pub kind: String,
    pub body: serde_json::Value,
}

impl Record {
    pub fn new(seq: u64, at: NaiveDate, cmd: &Command) -> Self {
        let mut v = serde_json::to_value(cmd).expect("commands serialize");
        let body = v.get_mut("body").map(serde_json::Value::take).unwrap_or(serde_json::Value::Null);
        Record { seq, at, kind: cmd.kind().to_owned(), body }
    }

    pub fn command(&self) -> Result<Command, HubError> {
        let v = serde_json::json!({ "kind": self.kind, "body": self.body });
        serde_json::from_value(v).map_err(|e| HubError::JournalCorrupt { seq: self.seq, reason: e.to_string() })
    }
}

/// Materialized state after the first `seq` records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub seq: u64,
    pub state: State,
}

#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
    next_seq: u64,
}

impl Journal {
    /// Opens `dir/journal.jsonl` and reads back every record.
    pub fn open(dir: &Path) -> Result<(Journal, Vec<Record>), HubError> {
        fs::create_dir_all(dir)?;
        let path = dir.join(JOURNAL_FILE);
        let records = if path.exists() { read_records(&path)? } else { Vec::new() };
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        file.try_lock().map_err(|_| HubError::Io(format!("{} is in use by another process", dir.display())))?;
        let next_seq = records.last().map_or(1, |r| r.seq + 1);
        Ok((Journal { path, file, next_seq }, records))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    /// Writes one record as a single line and flushes it to disk.
    pub fn append(&mut self, at: NaiveDate, cmd: &Command) -> Result<Record, HubError> {
        let record = Record::new(self.next_seq, at, cmd);
        let mut line = serde_json::to_vec(&record).map_err(|e| HubError::Io(e.to_string()))?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        self.next_seq += 1;
        Ok(record)
    }
}

/// Parses a journal file; the first bad or out-of-order line is reported by
/// the sequence number it should have had.
pub fn read_records(path: &Path) -> Result<Vec<Record>, HubError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out: Vec<Record> = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let expected = out.len() as u64 + 1;
        if line.trim().is_empty() {
            return Err(HubError::JournalCorrupt { seq: expected, reason: "empty line".into() });
        }
        let record: Record = serde_json::from_str(&line)
            .map_err(|e| HubError::JournalCorrupt { seq: expected, reason: e.to_string() })?;
        if record.seq != expected {
            return Err(HubError::JournalCorrupt { seq: expected, reason: format!("found seq {}", record.seq) });
        }
        out.push(record);
    }
    Ok(out)
}

pub fn read_checkpoint(dir: &Path) -> Result<Option<Checkpoint>, HubError> {
    let path = dir.join(CHECKPOINT_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let bytes = fs::read(&path)?;
    serde_json::from_slice(&bytes).map(Some).map_err(|e| HubError::Io(format!("checkpoint unreadable: {e}")))
}

/// Writes the checkpoint next to the journal, replacing any previous one atomically.
pub fn write_checkpoint(dir: &Path, cp: &Checkpoint) -> Result<PathBuf, HubError> {
    let path = dir.join(CHECKPOINT_FILE);
    let tmp = dir.join(format!("{CHECKPOINT_FILE}.tmp"));
    let bytes = serde_json::to_vec(cp).map_err(|e| HubError::Io(e.to_string()))?;
    {
        let mut f = File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(path)
}
