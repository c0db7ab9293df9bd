//! Issue-tracker data: records, persisted snapshots, and the REST client that fills them.

mod fetch;
mod snapshot;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::model::TimeWindow;

pub use fetch::{
    fetch_snapshot, Clock, FetchError, FetchOptions, HttpResponse, SystemClock, Transport,
    TransportError,
};
pub use snapshot::{load_snapshot, save_snapshot, SnapshotError, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssueEvent {
    pub kind: String,
    pub actor: Option<String>,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssueComment {
    pub actor: String,
    pub at: DateTime<Utc>,
    /// Unicode scalar count of the comment body.
    pub length_chars: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssueRecord {
    pub number: u64,
    pub title: String,
    pub body: String,
    pub opener: String,
    pub closer: Option<String>,
    pub opened_at: DateTime<Utc>,
    pub closed_at: Option<DateTime<Utc>>,
    pub is_pull_request: bool,
    pub events: Vec<IssueEvent>,
    pub comments: Vec<IssueComment>,
}

impl IssueRecord {
    pub fn title_len(&self) -> usize {
        self.title.chars().count()
    }

    pub fn body_len(&self) -> usize {
        self.body.chars().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub repo_id: String,
    pub fetched_at: DateTime<Utc>,
    pub issues: Vec<IssueRecord>,
}

/// Issues (not pull requests) closed inside `w`, in snapshot order.
pub fn select_study_issues(s: &Snapshot, w: &TimeWindow) -> Vec<IssueRecord> {
    s.issues
        .iter()
        .filter(|i| !i.is_pull_request && i.closed_at.is_some_and(|t| w.contains(t)))
        .cloned()
        .collect()
}

/// Drops events and comments stamped outside `w`.
pub fn restrict_activity_to_window(issues: &mut [IssueRecord], w: &TimeWindow) {
    for issue in issues {
        issue.events.retain(|e| w.contains(e.at));
        issue.comments.retain(|c| w.contains(c.at));
    }
}
