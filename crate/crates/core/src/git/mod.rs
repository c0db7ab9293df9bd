//! Commit records read from a line-oriented dump of `git log --numstat`.
//!
//! Dump layout, one block per commit:
//!
//! ```text
//! C|<id>|<author name>|<author email>|<author time>|<committer time>|<parent count>
//! M|<base64 of the full commit message>
//! <added>\t<deleted>\t<path>        (zero or more; `-` for binary files)
//! <blank line>
//! ```

mod dump;
mod raw;
mod refs;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::model::{TimeWindow, TimestampSource};

pub use dump::{parse_commit_log, write_commit_log, DumpError};
pub use raw::{convert_raw_log, git_log_args, RAW_LOG_FORMAT};
pub use refs::{extract_issue_refs, extract_issue_refs_with, RefsMode};

/// Line count from numstat; `None` for binary files.
pub type LineCount = Option<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDelta {
    pub path: String,
    pub lines_added: LineCount,
    pub lines_deleted: LineCount,
}

impl FileDelta {
    pub fn new(path: impl Into<String>, added: LineCount, deleted: LineCount) -> Self {
        Self {
            path: path.into(),
            lines_added: added,
            lines_deleted: deleted,
        }
    }

    /// Added plus deleted lines; unknown counts contribute zero.
    pub fn known_line_changes(&self) -> u64 {
        self.lines_added.unwrap_or(0) + self.lines_deleted.unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub id: String,
    pub author_name: String,
    pub author_email: String,
    pub author_time: DateTime<Utc>,
    pub committer_time: DateTime<Utc>,
    pub message: String,
    pub parent_count: u32,
    pub file_deltas: Vec<FileDelta>,
}

impl CommitRecord {
    pub fn is_merge(&self) -> bool {
        self.parent_count >= 2
    }

    pub fn timestamp(&self, source: TimestampSource) -> DateTime<Utc> {
        match source {
            TimestampSource::Author => self.author_time,
            TimestampSource::Committer => self.committer_time,
        }
    }

    pub fn known_line_changes(&self) -> u64 {
        self.file_deltas.iter().map(FileDelta::known_line_changes).sum()
    }
}

pub fn is_valid_commit_id(id: &str) -> bool {
    id.len() == 40 && id.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// Non-merge commits whose selected timestamp falls inside `w`, in input order.
pub fn filter_commits(
    commits: &[CommitRecord],
    w: &TimeWindow,
    source: TimestampSource,
) -> Vec<CommitRecord> {
    commits
        .iter()
        .filter(|c| !c.is_merge() && w.contains(c.timestamp(source)))
        .cloned()
        .collect()
}
