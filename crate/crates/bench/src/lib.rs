//! Synthetic cohort data for benchmarks and timing checks.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cohort_miner::git::{write_commit_log, CommitRecord, FileDelta};
use cohort_miner::tracker::{save_snapshot, IssueComment, IssueEvent, IssueRecord, Snapshot};

pub const REPO: &str = "synthetic/team";

pub struct Synthetic {
    pub project_end: DateTime<Utc>,
    pub commits: Vec<CommitRecord>,
    pub snapshot: Snapshot,
}

pub fn project_end() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2018, 2, 9, 0, 0, 0).unwrap()
}

/// `commits` commits by `authors` people spread over the 14 days before the
/// project end, so roughly half fall in a one-week window.
pub fn synthetic(commits: usize, issues: usize, authors: usize, seed: u64) -> Synthetic {
    let mut rng = StdRng::seed_from_u64(seed);
    let end = project_end();
    let span = 14 * 24 * 3600;
    let authors = authors.max(1);

    let commits = (0..commits)
        .map(|k| {
            let who = rng.gen_range(0..authors);
            let at = end - Duration::seconds(rng.gen_range(1..=span));
            let files = rng.gen_range(1..6);
            let file_deltas = (0..files)
                .map(|f| {
                    if rng.gen_ratio(1, 50) {
                        FileDelta::new(format!("assets/img{f}.png"), None, None)
                    } else {
                        FileDelta::new(
                            format!("src/mod{}/file{f}.java", rng.gen_range(0..20)),
                            Some(rng.gen_range(0..200)),
                            Some(rng.gen_range(0..80)),
                        )
                    }
                })
                .collect();
            let message = if rng.gen_ratio(1, 3) {
                format!("Work on #{} and #{}", rng.gen_range(1..=issues.max(1)), rng.gen_range(1..400))
            } else {
                format!("Change {k}")
            };
            CommitRecord {
                id: format!("{:040x}", k as u128 * 0x9e37_79b9 + 1),
                author_name: format!("Student {who}"),
                author_email: format!("s{who}@uni.example"),
                author_time: at,
                committer_time: at,
                message,
                parent_count: if rng.gen_ratio(1, 20) { 2 } else { 1 },
                file_deltas,
            }
        })
        .collect();

    let issues = (1..=issues as u64)
        .map(|number| {
            let opened = end - Duration::seconds(rng.gen_range(span..2 * span));
            let closed = rng
                .gen_ratio(4, 5)
                .then(|| end - Duration::seconds(rng.gen_range(1..span)));
            let login = |r: &mut StdRng| format!("s{}", r.gen_range(0..authors));
            let events = (0..rng.gen_range(0..6))
                .map(|_| IssueEvent {
                    kind: "labeled".into(),
                    actor: Some(login(&mut rng)),
                    at: opened + Duration::hours(1),
                })
                .collect();
            let comments = (0..rng.gen_range(0..4))
                .map(|_| IssueComment {
                    actor: login(&mut rng),
                    at: opened + Duration::hours(2),
                    length_chars: rng.gen_range(1..400),
                })
                .collect();
            IssueRecord {
                number,
                title: format!("Task {number}"),
                body: "x".repeat(rng.gen_range(0..300)),
                opener: login(&mut rng),
                closer: closed.map(|_| login(&mut rng)),
                opened_at: opened,
                closed_at: closed,
                is_pull_request: rng.gen_ratio(1, 8),
                events,
                comments,
            }
        })
        .collect();

    Synthetic {
        project_end: end,
        commits,
        snapshot: Snapshot {
            repo_id: REPO.into(),
            fetched_at: end + Duration::days(1),
            issues,
        },
    }
}

pub fn dump_bytes(s: &Synthetic) -> Vec<u8> {
    let mut out = Vec::new();
    write_commit_log(&s.commits, &mut out).expect("writing to memory");
    out
}

/// Writes dump, snapshot and a one-cohort config into `dir`; returns the config path.
pub fn write_workspace(dir: &Path, s: &Synthetic) -> io::Result<PathBuf> {
    fs::write(dir.join("team.dump"), dump_bytes(s))?;
    fs::write(dir.join("team.json"), save_snapshot(&s.snapshot))?;
    let config = dir.join("cohorts.conf");
    fs::write(
        &config,
        format!(
            "[[cohort]]\nlabel = \"synthetic\"\n\n[[cohort.project]]\nname = \"team\"\nrepo = \"{REPO}\"\n\
             dump = \"team.dump\"\nsnapshot = \"team.json\"\nproject_end = \"{}\"\n",
            s.project_end.to_rfc3339()
        ),
    )?;
    Ok(config)
}
