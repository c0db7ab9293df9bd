//! Mining of commit logs and issue-tracker snapshots for cohorts of student
//! projects: per-contributor process metrics over an end-of-project window,
//! survey statistics, and comparison tables.

pub mod config;
pub mod git;
pub mod identity;
pub mod metrics;
pub mod model;
pub mod report;
pub mod stats;
pub mod survey;
pub mod tracker;

pub use git::{extract_issue_refs, filter_commits, parse_commit_log, CommitRecord, FileDelta};
pub use identity::{resolve, AliasMap, ContributorSet, RawActor};
pub use metrics::{
    assemble, commit_metrics, issue_metrics, issue_text_stats, CohortMetrics, CommitMetrics,
    IssueMetrics, MetricOptions, TextStats,
};
pub use model::{window_contains, window_from_project_end, CohortSpec, ProjectSpec, TimeWindow};
pub use report::Format;
pub use survey::{boxplot_stats, choice_tally, likert_summary, BoxplotStats, LikertSample, LikertSummary};
pub use tracker::{select_study_issues, IssueRecord, Snapshot};
