//! JSON persistence for tracker snapshots.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "repo_id": "org/repo",
//!   "fetched_at": "2018-02-01T00:00:00Z",
//!   "issues": [ { "number": 1, "title": "...", ... } ]
//! }
//! ```

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{IssueRecord, Snapshot};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("snapshot schema violation at `{path}`: {reason}")]
pub struct SnapshotError {
    pub path: String,
    pub reason: String,
}

impl SnapshotError {
    fn at(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotFile {
    schema_version: u32,
    repo_id: String,
    fetched_at: DateTime<Utc>,
    issues: Vec<IssueRecord>,
}

pub fn save_snapshot(s: &Snapshot) -> Vec<u8> {
    let file = SnapshotFile {
        schema_version: SCHEMA_VERSION,
        repo_id: s.repo_id.clone(),
        fetched_at: s.fetched_at,
        issues: s.issues.clone(),
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("snapshot serializes to JSON");
    out.push(b'\n');
    out
}

pub fn load_snapshot(bytes: &[u8]) -> Result<Snapshot, SnapshotError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let file: SnapshotFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        SnapshotError::at(path, e.into_inner().to_string())
    })?;
    de.end()
        .map_err(|e| SnapshotError::at(".", format!("trailing data: {e}")))?;

    if file.schema_version != SCHEMA_VERSION {
        return Err(SnapshotError::at(
            "schema_version",
            format!("unsupported version {} (expected {SCHEMA_VERSION})", file.schema_version),
        ));
    }
    validate_issues(&file.issues)?;
    Ok(Snapshot {
        repo_id: file.repo_id,
        fetched_at: file.fetched_at,
        issues: file.issues,
    })
}

fn validate_issues(issues: &[IssueRecord]) -> Result<(), SnapshotError> {
    let mut prev: Option<u64> = None;
    for (i, issue) in issues.iter().enumerate() {
        let at = |field: &str| format!("issues[{i}].{field}");
        if issue.number == 0 {
            return Err(SnapshotError::at(at("number"), "issue numbers are positive"));
        }
        if let Some(p) = prev {
            if issue.number <= p {
                return Err(SnapshotError::at(
                    at("number"),
                    format!("issue {} follows {p}; issues must be strictly ascending", issue.number),
                ));
            }
        }
        prev = Some(issue.number);
        if let Some(closed) = issue.closed_at {
            if closed < issue.opened_at {
                return Err(SnapshotError::at(at("closed_at"), "closed before it was opened"));
            }
            if issue.closer.is_none() {
                return Err(SnapshotError::at(at("closer"), "closed issue has no closer"));
            }
        }
        for (j, ev) in issue.events.iter().enumerate() {
            if ev.kind.is_empty() {
                return Err(SnapshotError::at(at(&format!("events[{j}].kind")), "empty event kind"));
            }
            if ev.kind == "commented" {
                return Err(SnapshotError::at(
                    at(&format!("events[{j}].kind")),
                    "comments belong in `comments`, not `events`",
                ));
            }
        }
    }
    Ok(())
}
