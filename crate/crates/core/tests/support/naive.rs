//! Straight-line recomputation of the metric definitions for generated instances.
//! Identities come from the generator's ground truth rather than the resolver.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use chrono::Duration;
use regex::Regex;

use cohort_miner::git::CommitRecord;
use cohort_miner::tracker::IssueRecord;

use super::gen::{self, Instance};

#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    pub n: usize,
    pub commits: Vec<CommitRecord>,
    pub issues: Vec<IssueRecord>,
    pub commit_amount: f64,
    pub touched_files: f64,
    pub last_minute_commits: f64,
    pub line_changes_per_commit: f64,
    pub unique_issues_referenced: f64,
    pub issue_amount: f64,
    pub issue_events: f64,
    pub issue_comments: f64,
    pub pct_same_open_close: f64,
    /// (mean, stdev, median) of body and title lengths, when any issue is selected.
    pub body: Option<(f64, f64, f64)>,
    pub title: Option<(f64, f64, f64)>,
}

pub fn refs(message: &str) -> BTreeSet<u64> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(?:^|[^\p{Alphabetic}\p{N}])#([0-9]+)").unwrap());
    // matches may share the delimiter character, so scan one start position at a time
    let mut out = BTreeSet::new();
    let mut start = 0;
    while let Some(c) = re.captures_at(message, start) {
        let digits = c.get(1).unwrap();
        if let Ok(n) = digits.as_str().parse::<u64>() {
            if n > 0 {
                out.insert(n);
            }
        }
        start = digits.end();
    }
    out
}

fn person_of_email(email: &str) -> Option<usize> {
    let lower = email.to_lowercase();
    let (local, _) = lower.split_once('@')?;
    local.strip_prefix('s')?.parse().ok()
}

fn person_of_login(login: &str) -> Option<usize> {
    login.strip_prefix("stud")?.parse().ok()
}

/// Identity key: the person for aliased persons, otherwise the raw account.
fn commit_key(inst: &Instance, email: &str) -> String {
    let p = person_of_email(email).expect("generated e-mail");
    if inst.aliased[p] {
        format!("person {p}")
    } else if email.to_lowercase() == gen::uni_email(p) {
        format!("uni {p}")
    } else {
        format!("home {p}")
    }
}

fn login_key(inst: &Instance, login: &str) -> String {
    let p = person_of_login(login).expect("generated login");
    if inst.aliased[p] {
        format!("person {p}")
    } else {
        format!("login {p}")
    }
}

fn summary(xs: &[f64]) -> Option<(f64, f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let stdev = if xs.len() == 1 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    let median = if k % 2 == 1 { s[k / 2] } else { (s[k / 2 - 1] + s[k / 2]) / 2.0 };
    Some((mean, stdev, median))
}

pub fn expected(inst: &Instance) -> Expected {
    let end = inst.spec.project_end;
    let start = end - Duration::days(i64::from(inst.spec.window_days));
    let lm = Duration::hours(i64::from(inst.spec.last_minute_hours));

    let commits: Vec<CommitRecord> = inst
        .commits
        .iter()
        .filter(|c| c.parent_count < 2 && start <= c.author_time && c.author_time < end)
        .cloned()
        .collect();
    let issues: Vec<IssueRecord> = inst
        .issues
        .iter()
        .filter(|i| !i.is_pull_request)
        .filter(|i| matches!(i.closed_at, Some(t) if start <= t && t < end))
        .cloned()
        .collect();

    let mut active = BTreeSet::new();
    for c in &commits {
        active.insert(commit_key(inst, &c.author_email));
    }
    for i in &issues {
        active.insert(login_key(inst, &i.opener));
        active.insert(login_key(inst, i.closer.as_ref().unwrap()));
        for e in &i.events {
            if let Some(a) = &e.actor {
                active.insert(login_key(inst, a));
            }
        }
        for c in &i.comments {
            active.insert(login_key(inst, &c.actor));
        }
    }
    let n = active.len();
    let nf = n.max(1) as f64;

    let mut touched = 0usize;
    let mut last_minute = 0usize;
    let mut lines = 0u64;
    let mut all_refs = BTreeSet::new();
    for c in &commits {
        touched += c.file_deltas.len();
        if end - c.author_time < lm {
            last_minute += 1;
        }
        for d in &c.file_deltas {
            lines += d.lines_added.unwrap_or(0) + d.lines_deleted.unwrap_or(0);
        }
        all_refs.extend(refs(&c.message));
    }

    let mut events = 0usize;
    let mut comments = 0usize;
    let mut same = 0usize;
    for i in &issues {
        events += i.events.len();
        comments += i.comments.len();
        if login_key(inst, &i.opener) == login_key(inst, i.closer.as_ref().unwrap()) {
            same += 1;
        }
    }

    let bodies: Vec<f64> = issues.iter().map(|i| i.body.chars().count() as f64).collect();
    let titles: Vec<f64> = issues.iter().map(|i| i.title.chars().count() as f64).collect();

    Expected {
        n,
        commit_amount: commits.len() as f64 / nf,
        touched_files: touched as f64 / nf,
        last_minute_commits: last_minute as f64 / nf,
        line_changes_per_commit: if commits.is_empty() {
            0.0
        } else {
            lines as f64 / commits.len() as f64
        },
        unique_issues_referenced: all_refs.len() as f64 / nf,
        issue_amount: issues.len() as f64 / nf,
        issue_events: events as f64 / nf,
        issue_comments: comments as f64 / nf,
        pct_same_open_close: if issues.is_empty() {
            0.0
        } else {
            100.0 * same as f64 / issues.len() as f64
        },
        body: summary(&bodies),
        title: summary(&titles),
        commits,
        issues,
    }
}
