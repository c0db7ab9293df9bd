//! Per-contributor process metrics over a study window.
//!
//! Counts are tallied per project as integers, summed across a cohort, and only
//! then divided by the number of active contributors.

use std::collections::BTreeSet;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::git::{extract_issue_refs_with, filter_commits, CommitRecord, RefsMode};
use crate::identity::{self, AliasMap, ContributorSet, IdentityError};
use crate::model::{CohortSpec, ModelError, ProjectSpec, TimeWindow, TimestampSource};
use crate::stats;
use crate::tracker::{restrict_activity_to_window, select_study_issues, IssueRecord, Snapshot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("contributor count must be at least 1")]
    NoContributors,
    #[error("empty-selection: no issues selected; text statistics need at least one")]
    EmptySelection,
    #[error("empty-window: project `{project}` has no active contributors in {window}")]
    EmptyWindow { project: String, window: TimeWindow },
    #[error("{project}: {source}")]
    Identity {
        project: String,
        #[source]
        source: IdentityError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cohort `{0}`: project data does not match the configured projects")]
    ProjectMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TouchedFilesMode {
    /// A file changed in three commits counts three times.
    #[default]
    PerCommit,
    /// Distinct paths per project.
    Distinct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregateMode {
    /// Pool all projects of a cohort, then normalize once.
    #[default]
    Pooled,
    /// Compute each project separately and average the metrics.
    MeanOfProjects,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricOptions {
    pub timestamp_source: TimestampSource,
    pub refs: RefsMode,
    pub touched_files: TouchedFilesMode,
    /// Also divide line changes per commit by the contributor count.
    pub normalize_line_changes: bool,
    pub aggregate: AggregateMode,
    /// Count only events and comments stamped inside the window.
    pub strict_window_events: bool,
}

/// Commits authored less than `threshold` before `project_end` are last-minute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LastMinuteRule {
    pub project_end: DateTime<Utc>,
    pub threshold: Duration,
}

impl LastMinuteRule {
    pub fn of(p: &ProjectSpec) -> Self {
        Self {
            project_end: p.project_end,
            threshold: p.last_minute_threshold(),
        }
    }

    pub fn is_last_minute(&self, t: DateTime<Utc>) -> bool {
        self.project_end - t < self.threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CommitMetrics {
    pub commit_amount: f64,
    pub touched_files: f64,
    pub last_minute_commits: f64,
    pub line_changes_per_commit: f64,
    pub unique_issues_referenced: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IssueMetrics {
    pub issue_amount: f64,
    pub issue_events: f64,
    pub issue_comments: f64,
    pub pct_same_open_close: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LengthStats {
    pub mean: f64,
    pub stdev: f64,
    pub median: f64,
}

impl LengthStats {
    fn of(lengths: &[f64]) -> Option<Self> {
        Some(Self {
            mean: stats::mean(lengths)?,
            stdev: stats::sample_stdev(lengths)?,
            median: stats::median(lengths)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TextStats {
    pub body: LengthStats,
    pub title: LengthStats,
}

/// Integer commit counts for one project or a pool of projects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CommitTotals {
    pub commits: u64,
    pub touched_files: u64,
    pub last_minute: u64,
    pub line_changes: u64,
    /// Distinct references, counted per project and summed.
    pub unique_refs: u64,
}

impl CommitTotals {
    pub fn tally(commits: &[CommitRecord], rule: &LastMinuteRule, opts: &MetricOptions) -> Self {
        let touched_files = match opts.touched_files {
            TouchedFilesMode::PerCommit => commits.iter().map(|c| c.file_deltas.len() as u64).sum(),
            TouchedFilesMode::Distinct => commits
                .iter()
                .flat_map(|c| c.file_deltas.iter().map(|d| d.path.as_str()))
                .collect::<BTreeSet<_>>()
                .len() as u64,
        };
        let refs: BTreeSet<u64> = commits
            .iter()
            .flat_map(|c| extract_issue_refs_with(&c.message, opts.refs))
            .collect();
        Self {
            commits: commits.len() as u64,
            touched_files,
            last_minute: commits
                .iter()
                .filter(|c| rule.is_last_minute(c.timestamp(opts.timestamp_source)))
                .count() as u64,
            line_changes: commits.iter().map(CommitRecord::known_line_changes).sum(),
            unique_refs: refs.len() as u64,
        }
    }

    pub fn add(&mut self, other: &Self) {
        self.commits += other.commits;
        self.touched_files += other.touched_files;
        self.last_minute += other.last_minute;
        self.line_changes += other.line_changes;
        self.unique_refs += other.unique_refs;
    }

    pub fn per_contributor(&self, n: usize, opts: &MetricOptions) -> Result<CommitMetrics, MetricsError> {
        if n == 0 {
            return Err(MetricsError::NoContributors);
        }
        let n = n as f64;
        let mut line_changes_per_commit = if self.commits == 0 {
            0.0
        } else {
            self.line_changes as f64 / self.commits as f64
        };
        if opts.normalize_line_changes {
            line_changes_per_commit /= n;
        }
        Ok(CommitMetrics {
            commit_amount: self.commits as f64 / n,
            touched_files: self.touched_files as f64 / n,
            last_minute_commits: self.last_minute as f64 / n,
            line_changes_per_commit,
            unique_issues_referenced: self.unique_refs as f64 / n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IssueTotals {
    pub issues: u64,
    pub events: u64,
    pub comments: u64,
    pub same_open_close: u64,
}

impl IssueTotals {
    pub fn tally(issues: &[IssueRecord], cs: &ContributorSet) -> Self {
        let same = issues
            .iter()
            .filter(|i| match &i.closer {
                Some(closer) => cs.id_of_login(&i.opener) == cs.id_of_login(closer),
                None => false,
            })
            .count();
        Self {
            issues: issues.len() as u64,
            events: issues.iter().map(|i| i.events.len() as u64).sum(),
            comments: issues.iter().map(|i| i.comments.len() as u64).sum(),
            same_open_close: same as u64,
        }
    }

    pub fn add(&mut self, other: &Self) {
        self.issues += other.issues;
        self.events += other.events;
        self.comments += other.comments;
        self.same_open_close += other.same_open_close;
    }

    pub fn per_contributor(&self, n: usize) -> Result<IssueMetrics, MetricsError> {
        if n == 0 {
            return Err(MetricsError::NoContributors);
        }
        let n = n as f64;
        Ok(IssueMetrics {
            issue_amount: self.issues as f64 / n,
            issue_events: self.events as f64 / n,
            issue_comments: self.comments as f64 / n,
            pct_same_open_close: if self.issues == 0 {
                0.0
            } else {
                100.0 * self.same_open_close as f64 / self.issues as f64
            },
        })
    }
}

pub fn commit_metrics(
    commits: &[CommitRecord],
    n: usize,
    rule: &LastMinuteRule,
    opts: &MetricOptions,
) -> Result<CommitMetrics, MetricsError> {
    CommitTotals::tally(commits, rule, opts).per_contributor(n, opts)
}

pub fn issue_metrics(
    issues: &[IssueRecord],
    n: usize,
    cs: &ContributorSet,
) -> Result<IssueMetrics, MetricsError> {
    IssueTotals::tally(issues, cs).per_contributor(n)
}

pub fn issue_text_stats(issues: &[IssueRecord]) -> Result<TextStats, MetricsError> {
    let bodies: Vec<f64> = issues.iter().map(|i| i.body_len() as f64).collect();
    let titles: Vec<f64> = issues.iter().map(|i| i.title_len() as f64).collect();
    match (LengthStats::of(&bodies), LengthStats::of(&titles)) {
        (Some(body), Some(title)) => Ok(TextStats { body, title }),
        _ => Err(MetricsError::EmptySelection),
    }
}

/// Raw inputs for one project of a cohort.
#[derive(Debug, Clone)]
pub struct ProjectData {
    pub spec: ProjectSpec,
    pub commits: Vec<CommitRecord>,
    pub snapshot: Snapshot,
}

/// One project's window-filtered commits and selected issues.
#[derive(Debug, Clone)]
pub struct PreparedProject {
    pub name: String,
    pub window: TimeWindow,
    pub rule: LastMinuteRule,
    pub commits: Vec<CommitRecord>,
    pub issues: Vec<IssueRecord>,
}

pub fn prepare_project(data: &ProjectData, opts: &MetricOptions) -> Result<PreparedProject, MetricsError> {
    data.spec.validate()?;
    let window = data.spec.window();
    let commits = filter_commits(&data.commits, &window, opts.timestamp_source);
    let mut issues = select_study_issues(&data.snapshot, &window);
    if opts.strict_window_events {
        restrict_activity_to_window(&mut issues, &window);
    }
    Ok(PreparedProject {
        name: data.spec.name.clone(),
        window,
        rule: LastMinuteRule::of(&data.spec),
        commits,
        issues,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectProvenance {
    pub name: String,
    pub window: TimeWindow,
    pub commits: usize,
    pub issues: usize,
    pub active_contributors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub projects: Vec<ProjectProvenance>,
    pub commit_count: usize,
    pub issue_count: usize,
    /// No commits survived filtering; line changes per commit reported as 0.
    pub empty_commits: bool,
    /// No issues selected; the percentage is reported as 0 and text stats are absent.
    pub empty_issue_selection: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortMetrics {
    pub cohort_label: String,
    /// Envelope of the project windows.
    pub window: TimeWindow,
    pub contributor_count: usize,
    pub commit: CommitMetrics,
    pub issue: IssueMetrics,
    pub text: Option<TextStats>,
    pub kanban_flag: bool,
    pub provenance: Provenance,
}

/// Computes the cohort row from the raw data of each configured project.
pub fn assemble(
    cohort: &CohortSpec,
    projects: &[ProjectData],
    aliases: &AliasMap,
    opts: &MetricOptions,
) -> Result<CohortMetrics, MetricsError> {
    cohort.validate()?;
    let configured: Vec<&str> = cohort.projects.iter().map(|p| p.name.as_str()).collect();
    let given: Vec<&str> = projects.iter().map(|p| p.spec.name.as_str()).collect();
    if configured != given {
        return Err(MetricsError::ProjectMismatch(cohort.label.clone()));
    }

    let prepared = projects
        .iter()
        .map(|p| prepare_project(p, opts))
        .collect::<Result<Vec<_>, _>>()?;

    let actors: Vec<_> = prepared
        .iter()
        .flat_map(|p| identity::collect_actors(&p.commits, &p.issues))
        .collect();
    let cs = identity::resolve(&actors, aliases).map_err(|source| MetricsError::Identity {
        project: cohort.label.clone(),
        source,
    })?;

    let mut active_union = BTreeSet::new();
    let mut provenance = Vec::with_capacity(prepared.len());
    for p in &prepared {
        let active = identity::active_contributors(&cs, &p.commits, &p.issues);
        if active.is_empty() {
            return Err(MetricsError::EmptyWindow {
                project: p.name.clone(),
                window: p.window,
            });
        }
        provenance.push(ProjectProvenance {
            name: p.name.clone(),
            window: p.window,
            commits: p.commits.len(),
            issues: p.issues.len(),
            active_contributors: active.len(),
        });
        active_union.extend(active);
    }
    let n = active_union.len();

    let (commit, issue) = match opts.aggregate {
        AggregateMode::Pooled => {
            let mut ct = CommitTotals::default();
            let mut it = IssueTotals::default();
            for p in &prepared {
                ct.add(&CommitTotals::tally(&p.commits, &p.rule, opts));
                it.add(&IssueTotals::tally(&p.issues, &cs));
            }
            (ct.per_contributor(n, opts)?, it.per_contributor(n)?)
        }
        AggregateMode::MeanOfProjects => {
            let mut per_commit = Vec::new();
            let mut per_issue = Vec::new();
            for (p, prov) in prepared.iter().zip(&provenance) {
                let k = prov.active_contributors;
                per_commit.push(commit_metrics(&p.commits, k, &p.rule, opts)?);
                per_issue.push(issue_metrics(&p.issues, k, &cs)?);
            }
            (mean_commit_metrics(&per_commit), mean_issue_metrics(&per_issue))
        }
    };

    let all_issues: Vec<IssueRecord> = prepared.iter().flat_map(|p| p.issues.iter().cloned()).collect();
    let commit_count: usize = prepared.iter().map(|p| p.commits.len()).sum();
    let window = envelope(prepared.iter().map(|p| p.window));

    Ok(CohortMetrics {
        cohort_label: cohort.label.clone(),
        window,
        contributor_count: n,
        commit,
        issue,
        text: issue_text_stats(&all_issues).ok(),
        kanban_flag: cohort.kanban_flag,
        provenance: Provenance {
            projects: provenance,
            commit_count,
            issue_count: all_issues.len(),
            empty_commits: commit_count == 0,
            empty_issue_selection: all_issues.is_empty(),
        },
    })
}

fn envelope(mut windows: impl Iterator<Item = TimeWindow>) -> TimeWindow {
    let first = windows.next().expect("cohort has at least one project");
    windows.fold(first, |acc, w| {
        TimeWindow::new(acc.start().min(w.start()), acc.end().max(w.end()))
            .expect("envelope of non-empty windows is non-empty")
    })
}

fn mean_commit_metrics(ms: &[CommitMetrics]) -> CommitMetrics {
    let k = ms.len() as f64;
    let avg = |f: fn(&CommitMetrics) -> f64| ms.iter().map(f).sum::<f64>() / k;
    CommitMetrics {
        commit_amount: avg(|m| m.commit_amount),
        touched_files: avg(|m| m.touched_files),
        last_minute_commits: avg(|m| m.last_minute_commits),
        line_changes_per_commit: avg(|m| m.line_changes_per_commit),
        unique_issues_referenced: avg(|m| m.unique_issues_referenced),
    }
}

fn mean_issue_metrics(ms: &[IssueMetrics]) -> IssueMetrics {
    let k = ms.len() as f64;
    let avg = |f: fn(&IssueMetrics) -> f64| ms.iter().map(f).sum::<f64>() / k;
    IssueMetrics {
        issue_amount: avg(|m| m.issue_amount),
        issue_events: avg(|m| m.issue_events),
        issue_comments: avg(|m| m.issue_comments),
        pct_same_open_close: avg(|m| m.pct_same_open_close),
    }
}
