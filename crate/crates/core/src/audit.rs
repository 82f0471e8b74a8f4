//! Append-only audit log.
//!
//! One JSON object per line, keys in a fixed order:
//! `model, ts, session, transition, user, group, level, resource, outcome`.
//! Sequence numbers are line positions, starting at 1.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use chrono::{DateTime, Duration, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditOutcome {
    Used,
    Denied,
    Quit,
}

impl AuditOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            AuditOutcome::Used => "used",
            AuditOutcome::Denied => "denied",
            AuditOutcome::Quit => "quit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditRecord {
    pub model: Model,
    #[serde(with = "millis")]
    pub ts: DateTime<Utc>,
    pub session: String,
    pub transition: String,
    pub user: String,
    pub group: String,
    pub level: u8,
    pub resource: String,
    pub outcome: AuditOutcome,
}

mod millis {
    use chrono::{DateTime, NaiveDateTime, Utc};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    const FORMAT: &str = "%Y-%m-%dT%H:%M:%S%.3fZ";

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&ts.format(FORMAT))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        NaiveDateTime::parse_from_str(&raw, FORMAT)
            .ok()
            .filter(|_| raw.len() == 24)
            .map(|n| n.and_utc())
            .ok_or_else(|| D::Error::custom(format!("bad timestamp {raw:?}")))
    }
}

impl AuditRecord {
    pub fn validate(&self) -> Result<(), AuditError> {
        let fail = |msg: &str| Err(AuditError::Invalid(msg.to_string()));
        if self.session.is_empty() {
            return fail("empty session id");
        }
        if self.transition.is_empty() {
            return fail("empty transition name");
        }
        if !self.ts.timestamp_subsec_nanos().is_multiple_of(1_000_000) {
            return fail("timestamp finer than milliseconds");
        }
        if self.outcome == AuditOutcome::Used {
            if self.group.is_empty() {
                return fail("used record without group");
            }
            if self.resource.is_empty() {
                return fail("used record without resource");
            }
            if self.level == 0 {
                return fail("used record without level");
            }
        }
        Ok(())
    }

    /// The record's log line, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("audit record serializes")
    }
}

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("invalid audit record: {0}")]
    Invalid(String),
    #[error("audit log line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("audit log I/O: {0}")]
    Io(#[from] io::Error),
    #[error("audit appender lock poisoned")]
    Poisoned,
}

/// Source of record timestamps.
pub trait Clock {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now().trunc_subsecs(3)
    }
}

/// Deterministic clock: starts at a fixed instant and advances one
/// millisecond per reading.
#[derive(Debug)]
pub struct FixedClock {
    next: Mutex<DateTime<Utc>>,
}

impl FixedClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        FixedClock {
            next: Mutex::new(start.trunc_subsecs(3)),
        }
    }

    /// 2000-01-01T00:00:00.000Z
    pub fn epoch() -> Self {
        FixedClock::new(DateTime::from_timestamp(946_684_800, 0).expect("valid instant"))
    }
}

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        let mut next = self.next.lock().unwrap_or_else(|e| e.into_inner());
        let now = *next;
        *next = now + Duration::milliseconds(1);
        now
    }
}

/// Anything that accepts audit records and hands back their sequence number.
pub trait AuditSink {
    fn append(&mut self, record: AuditRecord) -> Result<u64, AuditError>;
}

/// File- or stream-backed appender. Every record is flushed before `append`
/// returns.
#[derive(Debug)]
pub struct AuditLog<W: Write> {
    out: W,
    seq: u64,
}

impl<W: Write> AuditLog<W> {
    pub fn new(out: W) -> Self {
        AuditLog { out, seq: 0 }
    }

    /// Resumes numbering after `existing` records.
    pub fn resume(out: W, existing: u64) -> Self {
        AuditLog { out, seq: existing }
    }

    pub fn last_sequence(&self) -> u64 {
        self.seq
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl AuditLog<File> {
    /// Opens (or creates) a log file for appending, continuing its numbering.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, AuditError> {
        let path = path.as_ref();
        let existing = match File::open(path) {
            Ok(f) => BufReader::new(f)
                .lines()
                .try_fold(0u64, |n, l| l.map(|_| n + 1))?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => 0,
            Err(e) => return Err(e.into()),
        };
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(AuditLog::resume(file, existing))
    }
}

impl<W: Write> AuditSink for AuditLog<W> {
    fn append(&mut self, record: AuditRecord) -> Result<u64, AuditError> {
        record.validate()?;
        let mut line = record.to_line();
        line.push('\n');
        self.out.write_all(line.as_bytes())?;
        self.out.flush()?;
        self.seq += 1;
        Ok(self.seq)
    }
}

/// In-memory sink, used by verification runs and tests.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct MemoryAudit {
    records: Vec<AuditRecord>,
}

impl MemoryAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[AuditRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<AuditRecord> {
        self.records
    }
}

impl AuditSink for MemoryAudit {
    fn append(&mut self, record: AuditRecord) -> Result<u64, AuditError> {
        record.validate()?;
        self.records.push(record);
        Ok(self.records.len() as u64)
    }
}

/// Serialized append point shared by concurrent sessions.
impl<S: AuditSink + ?Sized> AuditSink for &Mutex<S> {
    fn append(&mut self, record: AuditRecord) -> Result<u64, AuditError> {
        self.lock()
            .map_err(|_| AuditError::Poisoned)?
            .append(record)
    }
}

impl<S: AuditSink + ?Sized> AuditSink for &mut S {
    fn append(&mut self, record: AuditRecord) -> Result<u64, AuditError> {
        (**self).append(record)
    }
}

/// Reads every record back in stored order.
pub fn replay<R: BufRead>(log: R) -> Result<Vec<AuditRecord>, AuditError> {
    let mut out = Vec::new();
    for (offset, line) in log.lines().enumerate() {
        let line = line?;
        let record: AuditRecord = serde_json::from_str(&line).map_err(|e| AuditError::Parse {
            line: offset + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn replay_file(path: impl AsRef<Path>) -> Result<Vec<AuditRecord>, AuditError> {
    replay(BufReader::new(File::open(path)?))
}
