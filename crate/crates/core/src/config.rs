//! Cohort configuration file (TOML).
//!
//! ```toml
//! alias_map = "aliases.txt"          # optional
//! snapshot_dir = "snapshots"         # default: "snapshots"
//!
//! [tracker]
//! base_url = "https://api.github.com"
//!
//! [options]
//! timestamp_source = "author"        # author | committer
//! refs = "any"                       # any | keyword
//! touched_files = "per-commit"       # per-commit | distinct
//! normalize_line_changes = false
//! aggregate = "pooled"               # pooled | mean-of-projects
//! strict_window_events = false
//!
//! [[cohort]]
//! label = "2017/18"
//! kanban = true
//!
//! [[cohort.project]]
//! name = "team-a"
//! repo = "org/team-a"                # tracker repository
//! dump = "dumps/team-a.dump"         # commit dump
//! project_end = "2018-02-09T00:00:00Z"
//! window_days = 7                    # optional
//! last_minute_hours = 24             # optional
//! snapshot = "snapshots/a.json"      # optional, default <snapshot_dir>/<owner>__<name>.json
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Deserialize;
use thiserror::Error;

use crate::metrics::MetricOptions;
use crate::model::{CohortSpec, ModelError, ProjectSpec, DEFAULT_LAST_MINUTE_HOURS, DEFAULT_WINDOW_DAYS};

pub const DEFAULT_API_BASE: &str = "https://api.github.com";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {reason}")]
    Syntax { path: String, reason: String },
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: ModelError,
    },
    #[error("{path}: no cohort labelled `{label}`")]
    UnknownCohort { path: String, label: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    alias_map: Option<PathBuf>,
    #[serde(default = "default_snapshot_dir")]
    snapshot_dir: PathBuf,
    #[serde(default)]
    tracker: RawTracker,
    #[serde(default)]
    options: MetricOptions,
    #[serde(default, rename = "cohort")]
    cohorts: Vec<RawCohort>,
}

fn default_snapshot_dir() -> PathBuf {
    PathBuf::from("snapshots")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTracker {
    #[serde(default = "default_base")]
    base_url: String,
}

impl Default for RawTracker {
    fn default() -> Self {
        Self {
            base_url: default_base(),
        }
    }
}

fn default_base() -> String {
    DEFAULT_API_BASE.to_owned()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCohort {
    label: String,
    #[serde(default)]
    kanban: bool,
    #[serde(default, rename = "project")]
    projects: Vec<RawProject>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProject {
    name: String,
    repo: String,
    dump: PathBuf,
    project_end: DateTime<Utc>,
    window_days: Option<u32>,
    last_minute_hours: Option<u32>,
    snapshot: Option<PathBuf>,
}

/// Where a project's local inputs live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectSources {
    pub dump: PathBuf,
    pub snapshot: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortConfig {
    pub spec: CohortSpec,
    /// Parallel to `spec.projects`.
    pub sources: Vec<ProjectSources>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub cohorts: Vec<CohortConfig>,
    pub alias_map_path: Option<PathBuf>,
    pub snapshot_dir: PathBuf,
    pub api_base_url: String,
    pub options: MetricOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Syntax {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base, &path.display().to_string())
    }

    /// Parses config text; relative paths are joined onto `base_dir`.
    pub fn parse(text: &str, base_dir: &Path, origin: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax {
            path: origin.to_owned(),
            reason: e.to_string(),
        })?;
        let resolve = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            }
        };
        let snapshot_dir = resolve(&raw.snapshot_dir);

        let mut cohorts = Vec::with_capacity(raw.cohorts.len());
        for c in raw.cohorts {
            let mut projects = Vec::new();
            let mut sources = Vec::new();
            for p in c.projects {
                let snapshot = match &p.snapshot {
                    Some(s) => resolve(s),
                    None => snapshot_dir.join(snapshot_file_name(&p.repo)),
                };
                sources.push(ProjectSources {
                    dump: resolve(&p.dump),
                    snapshot,
                });
                projects.push(ProjectSpec {
                    name: p.name,
                    repo_source: p.repo,
                    project_end: p.project_end,
                    window_days: p.window_days.unwrap_or(DEFAULT_WINDOW_DAYS),
                    last_minute_hours: p.last_minute_hours.unwrap_or(DEFAULT_LAST_MINUTE_HOURS),
                });
            }
            let spec = CohortSpec {
                label: c.label,
                projects,
                kanban_flag: c.kanban,
            };
            spec.validate().map_err(|source| ConfigError::Invalid {
                path: origin.to_owned(),
                source,
            })?;
            cohorts.push(CohortConfig { spec, sources });
        }
        let mut labels: Vec<&str> = cohorts.iter().map(|c| c.spec.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(dup) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(ConfigError::Syntax {
                path: origin.to_owned(),
                reason: format!("cohort label `{}` is used twice", dup[0]),
            });
        }

        Ok(RunConfig {
            cohorts,
            alias_map_path: raw.alias_map.as_deref().map(resolve),
            snapshot_dir,
            api_base_url: raw.tracker.base_url,
            options: raw.options,
        })
    }

    pub fn cohort(&self, label: &str) -> Option<&CohortConfig> {
        self.cohorts.iter().find(|c| c.spec.label == label)
    }
}

/// `owner/name` becomes `owner__name.json`.
pub fn snapshot_file_name(repo: &str) -> String {
    let safe: String = repo
        .split('/')
        .map(|part| {
            part.chars()
                .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '-' })
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join("__");
    format!("{safe}.json")
}
