//! Append-only persistence of finalized responses.
//!
//! One JSON document per LF-terminated line. A session id is written at most
//! once; repeated appends return the id already on disk. A file that does
//! not end in LF has a torn final write and is refused on open.

use std::collections::HashMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bank::{Version, TASK_COUNT};
use crate::session::{SessionError, SessionId, SessionState, MAX_AGE};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseRecord {
    pub record_id: String,
    pub session_id: SessionId,
    pub version: u8,
    pub gender: String,
    pub age: Option<u32>,
    pub education: String,
    pub answers: Vec<u8>,
    pub response_times_ms: Vec<Option<u64>>,
    pub created_at: DateTime<Utc>,
}

impl ResponseRecord {
    /// Panics on records that did not pass [`validate_record`].
    pub fn version(&self) -> Version {
        Version::try_from(self.version).expect("validated record")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum RecordIssue {
    AnswersLength { len: usize },
    UnansweredSlot { slot: usize },
    AnswerOutOfRange { slot: usize, value: u8 },
    InvalidVersion { version: u8 },
    AgeOutOfRange { age: u32 },
    ResponseTimesLength { len: usize },
    RecordIdShape,
    EmptySessionId,
}

impl fmt::Display for RecordIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordIssue::AnswersLength { len } => {
                write!(f, "answers has {len} entries, expected 7")
            }
            RecordIssue::UnansweredSlot { slot } => write!(f, "unanswered slot {}", slot + 1),
            RecordIssue::AnswerOutOfRange { slot, value } => {
                write!(f, "answer {value} in slot {} is not 1 or 2", slot + 1)
            }
            RecordIssue::InvalidVersion { version } => write!(f, "version {version} is not 1 or 2"),
            RecordIssue::AgeOutOfRange { age } => write!(f, "age {age} exceeds {MAX_AGE}"),
            RecordIssue::ResponseTimesLength { len } => {
                write!(f, "response_times_ms has {len} entries, expected 7")
            }
            RecordIssue::RecordIdShape => f.write_str("record_id must be 24 lowercase hex chars"),
            RecordIssue::EmptySessionId => f.write_str("session_id is empty"),
        }
    }
}

fn join_issues(issues: &[RecordIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Collects every schema problem with `r`; an empty list means valid.
pub fn record_issues(r: &ResponseRecord) -> Vec<RecordIssue> {
    let mut issues = Vec::new();
    if r.answers.len() != TASK_COUNT {
        issues.push(RecordIssue::AnswersLength {
            len: r.answers.len(),
        });
    }
    for (slot, &value) in r.answers.iter().enumerate() {
        match value {
            1 | 2 => {}
            0 => issues.push(RecordIssue::UnansweredSlot { slot }),
            value => issues.push(RecordIssue::AnswerOutOfRange { slot, value }),
        }
    }
    if Version::try_from(r.version).is_err() {
        issues.push(RecordIssue::InvalidVersion { version: r.version });
    }
    if let Some(age) = r.age.filter(|&a| a > MAX_AGE) {
        issues.push(RecordIssue::AgeOutOfRange { age });
    }
    if r.response_times_ms.len() != TASK_COUNT {
        issues.push(RecordIssue::ResponseTimesLength {
            len: r.response_times_ms.len(),
        });
    }
    let id_ok = r.record_id.len() == 24
        && r.record_id
            .bytes()
            .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b));
    if !id_ok {
        issues.push(RecordIssue::RecordIdShape);
    }
    if r.session_id.as_str().is_empty() {
        issues.push(RecordIssue::EmptySessionId);
    }
    issues
}

pub fn validate_record(r: &ResponseRecord) -> Result<(), Vec<RecordIssue>> {
    let issues = record_issues(r);
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store i/o: {0}")]
    Io(#[from] io::Error),
    #[error("invalid record: {}", join_issues(.0))]
    Invalid(Vec<RecordIssue>),
    #[error("corrupt store at line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("store {0} is locked by another writer")]
    Locked(PathBuf),
    #[error("store unavailable: {0}")]
    Unavailable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VersionFilter {
    All,
    Only(Version),
}

impl VersionFilter {
    fn admits(self, r: &ResponseRecord) -> bool {
        match self {
            VersionFilter::All => true,
            VersionFilter::Only(v) => r.version == v.number(),
        }
    }
}

/// Persistence seam. The local line store is the only implementation
/// shipped; a remote document database would slot in here.
pub trait ResponseStore: Send {
    /// Persists `r` once per session id and returns its record id.
    fn append(&mut self, r: &ResponseRecord) -> Result<String, StoreError>;
    fn load(&self, filter: VersionFilter) -> Result<Vec<ResponseRecord>, StoreError>;
    fn contains(&self, session: &SessionId) -> bool;
}

/// Parses a whole store file, failing closed on the first bad line.
pub fn parse_records(content: &str) -> Result<Vec<ResponseRecord>, StoreError> {
    if !content.is_empty() && !content.ends_with('\n') {
        let line = content.lines().count();
        return Err(StoreError::Corrupt {
            line,
            reason: "truncated final line (no LF terminator)".into(),
        });
    }
    let mut records = Vec::new();
    let mut seen = HashMap::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        let record: ResponseRecord =
            serde_json::from_str(line).map_err(|e| StoreError::Corrupt {
                line: line_no,
                reason: e.to_string(),
            })?;
        if let Err(issues) = validate_record(&record) {
            return Err(StoreError::Corrupt {
                line: line_no,
                reason: join_issues(&issues),
            });
        }
        if let Some(first) = seen.insert(record.session_id.clone(), line_no) {
            return Err(StoreError::Corrupt {
                line: line_no,
                reason: format!(
                    "session {} already stored on line {first}",
                    record.session_id
                ),
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Reads a store file without taking the writer lock. A missing file
/// reads as empty.
pub fn read_store(path: &Path, filter: VersionFilter) -> Result<Vec<ResponseRecord>, StoreError> {
    let content = match fs::read_to_string(path) {
        Ok(c) => c,
        Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(e.into()),
    };
    Ok(parse_records(&content)?
        .into_iter()
        .filter(|r| filter.admits(r))
        .collect())
}

/// Single-writer handle on a line store file.
#[derive(Debug)]
pub struct JsonlStore {
    path: PathBuf,
    file: File,
    index: HashMap<SessionId, String>,
}

impl JsonlStore {
    /// Opens (creating if needed) and takes the exclusive writer lock.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)?;
        match file.try_lock() {
            Ok(()) => {}
            Err(fs::TryLockError::WouldBlock) => return Err(StoreError::Locked(path)),
            Err(fs::TryLockError::Error(e)) => return Err(e.into()),
        }
        let mut content = String::new();
        file.seek(SeekFrom::Start(0))?;
        file.read_to_string(&mut content)?;
        let index = parse_records(&content)?
            .into_iter()
            .map(|r| (r.session_id, r.record_id))
            .collect();
        Ok(JsonlStore { path, file, index })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    fn write_line(&mut self, line: &[u8]) -> io::Result<()> {
        let before = self.file.metadata()?.len();
        let result = self
            .file
            .write_all(line)
            .and_then(|_| self.file.sync_data());
        if result.is_err() {
            // roll back a torn write so the file stays line-complete
            let _ = self.file.set_len(before);
        }
        result
    }
}

impl ResponseStore for JsonlStore {
    fn append(&mut self, r: &ResponseRecord) -> Result<String, StoreError> {
        validate_record(r).map_err(StoreError::Invalid)?;
        if let Some(existing) = self.index.get(&r.session_id) {
            return Ok(existing.clone());
        }
        let mut line = serde_json::to_vec(r).map_err(|e| StoreError::Io(e.into()))?;
        line.push(b'\n');
        self.write_line(&line)?;
        self.index.insert(r.session_id.clone(), r.record_id.clone());
        Ok(r.record_id.clone())
    }

    fn load(&self, filter: VersionFilter) -> Result<Vec<ResponseRecord>, StoreError> {
        read_store(&self.path, filter)
    }

    fn contains(&self, session: &SessionId) -> bool {
        self.index.contains_key(session)
    }
}

#[derive(Debug, Error)]
pub enum FinalizeError {
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Persists a completed session exactly once and marks it finalized.
/// Safe to call repeatedly; a failed append leaves the session
/// unfinalized so the call can be retried.
pub fn finalize_session(
    store: &mut dyn ResponseStore,
    state: &mut SessionState,
    now: DateTime<Utc>,
) -> Result<String, FinalizeError> {
    let record = state.to_record(now)?;
    if state.finalized {
        return Ok(record.record_id);
    }
    let id = store.append(&record)?;
    state.finalized = true;
    Ok(id)
}

/// A document in the original per-version collections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionDocument {
    #[serde(rename = "_id")]
    pub id: String,
    pub gender: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub age: Option<u32>,
    pub education: String,
    pub answers: Vec<u8>,
}

impl From<&ResponseRecord> for CollectionDocument {
    fn from(r: &ResponseRecord) -> Self {
        CollectionDocument {
            id: r.record_id.clone(),
            gender: r.gender.clone(),
            age: r.age,
            education: r.education.clone(),
            answers: r.answers.clone(),
        }
    }
}

/// Two line-delimited document streams, one per game version.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CollectionExport {
    pub v1: String,
    pub v2: String,
}

pub fn export_collections(records: &[ResponseRecord]) -> CollectionExport {
    let mut out = CollectionExport::default();
    for r in records {
        let doc = serde_json::to_string(&CollectionDocument::from(r)).expect("document serializes");
        let stream = match r.version {
            1 => &mut out.v1,
            _ => &mut out.v2,
        };
        stream.push_str(&doc);
        stream.push('\n');
    }
    out
}

/// Writes `answers_v1.jsonl` and `answers_v2.jsonl` into `dir`.
pub fn write_collection_export(dir: &Path, records: &[ResponseRecord]) -> io::Result<[PathBuf; 2]> {
    fs::create_dir_all(dir)?;
    let export = export_collections(records);
    let v1 = dir.join("answers_v1.jsonl");
    let v2 = dir.join("answers_v2.jsonl");
    fs::write(&v1, export.v1)?;
    fs::write(&v2, export.v2)?;
    Ok([v1, v2])
}
