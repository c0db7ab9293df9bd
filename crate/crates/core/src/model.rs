//! Temporal and configuration types shared by every stage of the pipeline.

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_WINDOW_DAYS: u32 = 7;
pub const DEFAULT_LAST_MINUTE_HOURS: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("window length must be at least one day, got {0}")]
    NonPositiveDays(i64),
    #[error("window start {start} is not before end {end}")]
    EmptyInterval { start: DateTime<Utc>, end: DateTime<Utc> },
    #[error("project `{project}`: {reason}")]
    Project { project: String, reason: String },
    #[error("cohort `{cohort}`: {reason}")]
    Cohort { cohort: String, reason: String },
}

/// Half-open UTC interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeWindow {
    start: DateTime<Utc>,
    end: DateTime<Utc>,
}

impl TimeWindow {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self, ModelError> {
        if start >= end {
            return Err(ModelError::EmptyInterval { start, end });
        }
        Ok(Self { start, end })
    }

    /// The `days`-day window that closes at `end`.
    pub fn ending_at(end: DateTime<Utc>, days: i64) -> Result<Self, ModelError> {
        if days < 1 {
            return Err(ModelError::NonPositiveDays(days));
        }
        let start = end - Duration::hours(24 * days);
        Ok(Self { start, end })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.end
    }

    pub fn duration(&self) -> Duration {
        self.end - self.start
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {})",
            self.start.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true),
            self.end.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true)
        )
    }
}

pub fn window_from_project_end(end: DateTime<Utc>, days: i64) -> Result<TimeWindow, ModelError> {
    TimeWindow::ending_at(end, days)
}

pub fn window_contains(w: &TimeWindow, t: DateTime<Utc>) -> bool {
    w.contains(t)
}

/// Which commit timestamp drives window membership and last-minute classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimestampSource {
    #[default]
    Author,
    Committer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectSpec {
    pub name: String,
    /// Remote repository identifier (`owner/name`) used by the tracker client.
    pub repo_source: String,
    pub project_end: DateTime<Utc>,
    pub window_days: u32,
    pub last_minute_hours: u32,
}

impl ProjectSpec {
    pub fn new(
        name: impl Into<String>,
        repo_source: impl Into<String>,
        project_end: DateTime<Utc>,
    ) -> Self {
        Self {
            name: name.into(),
            repo_source: repo_source.into(),
            project_end,
            window_days: DEFAULT_WINDOW_DAYS,
            last_minute_hours: DEFAULT_LAST_MINUTE_HOURS,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: String| ModelError::Project {
            project: self.name.clone(),
            reason,
        };
        if self.name.trim().is_empty() {
            return Err(fail("name must not be empty".into()));
        }
        if self.window_days < 1 {
            return Err(fail("window_days must be at least 1".into()));
        }
        if self.last_minute_hours < 1 {
            return Err(fail("last_minute_hours must be at least 1".into()));
        }
        if u64::from(self.last_minute_hours) > u64::from(self.window_days) * 24 {
            return Err(fail(format!(
                "last_minute_hours ({}) exceeds the {}-day window",
                self.last_minute_hours, self.window_days
            )));
        }
        Ok(())
    }

    pub fn window(&self) -> TimeWindow {
        // window_days >= 1 once validated; fall back to one day otherwise
        TimeWindow::ending_at(self.project_end, i64::from(self.window_days.max(1)))
            .expect("window length is positive")
    }

    pub fn last_minute_threshold(&self) -> Duration {
        Duration::hours(i64::from(self.last_minute_hours))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohortSpec {
    pub label: String,
    pub projects: Vec<ProjectSpec>,
    pub kanban_flag: bool,
}

impl CohortSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: String| ModelError::Cohort {
            cohort: self.label.clone(),
            reason,
        };
        if self.projects.is_empty() {
            return Err(fail("at least one project is required".into()));
        }
        let mut seen = BTreeSet::new();
        for p in &self.projects {
            if !seen.insert(p.name.as_str()) {
                return Err(fail(format!("duplicate project name `{}`", p.name)));
            }
            p.validate()?;
        }
        Ok(())
    }
}
