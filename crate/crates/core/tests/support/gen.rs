use chrono::{DateTime, Duration, TimeZone, Utc};
use proptest::prelude::*;

use cohort_miner::git::{CommitRecord, FileDelta};
use cohort_miner::identity::{AliasMap, Matcher};
use cohort_miner::model::ProjectSpec;
use cohort_miner::tracker::{IssueComment, IssueEvent, IssueRecord, Snapshot};

pub fn project_end() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2018, 2, 9, 0, 0, 0).unwrap()
}

pub fn uni_email(p: usize) -> String {
    format!("s{p}@uni.example")
}

pub fn home_email(p: usize) -> String {
    format!("s{p}@home.example")
}

pub fn login(p: usize) -> String {
    format!("stud{p}")
}

/// A small project: persons `0..persons`, some of them listed in the alias map.
#[derive(Debug, Clone)]
pub struct Instance {
    pub persons: usize,
    /// `aliased[p]`: person `p` has an alias entry joining all their accounts.
    pub aliased: Vec<bool>,
    pub spec: ProjectSpec,
    pub commits: Vec<CommitRecord>,
    pub issues: Vec<IssueRecord>,
}

impl Instance {
    pub fn aliases(&self) -> AliasMap {
        let mut m = AliasMap::default();
        for p in (0..self.persons).filter(|&p| self.aliased[p]) {
            m.insert(
                &format!("p{p}"),
                vec![
                    Matcher::email(&uni_email(p)),
                    Matcher::email(&home_email(p)),
                    Matcher::login(&login(p)),
                ],
            )
            .unwrap();
        }
        m
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            repo_id: "org/repo".into(),
            fetched_at: project_end() + Duration::days(30),
            issues: self.issues.clone(),
        }
    }
}

/// Seconds before project end; covers the window, its edges and both outsides.
fn offset_secs(window_days: u32) -> impl Strategy<Value = i64> {
    let w = i64::from(window_days) * 86_400;
    prop_oneof![
        6 => -2 * 86_400..w + 2 * 86_400,
        1 => Just(w),
        1 => Just(0i64),
        1 => Just(1i64),
        1 => Just(w + 1),
    ]
}

fn at(offset: i64) -> DateTime<Utc> {
    project_end() - Duration::seconds(offset)
}

const MESSAGE_TOKENS: &[&str] = &[
    "fix", "closes", "#", "#1", "#2", "#3", "#17", "#20", "issue#4", "##7", "(#12)", "#0", "#007",
    "a", " ", " ", "\n", ", ", "ü", "x#5", "#9a", "#3#4", "Fixes", "and",
];

fn message() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(MESSAGE_TOKENS), 0..12).prop_map(|t| t.concat())
}

const PATHS: &[&str] = &[
    "src/a.rs", "src/b.rs", "README.md", "docs/x y.md", "img/logo.png", "tests/t.py", "Main.java",
];

fn deltas() -> impl Strategy<Value = Vec<FileDelta>> {
    let count = prop_oneof![
        2 => Just(None),
        8 => (0u64..300).prop_map(Some),
    ];
    prop::sample::subsequence(PATHS, 0..=5).prop_flat_map(move |paths| {
        let n = paths.len();
        prop::collection::vec((count.clone(), count.clone()), n).prop_map(move |lines| {
            paths
                .iter()
                .zip(lines)
                .map(|(p, (a, d))| FileDelta::new(*p, a, d))
                .collect()
        })
    })
}

fn commit(persons: usize, window_days: u32, idx: usize) -> impl Strategy<Value = CommitRecord> {
    (
        0..persons,
        0u8..3,
        offset_secs(window_days),
        0i64..3600,
        prop_oneof![1 => Just(0u32), 12 => Just(1u32), 2 => Just(2u32), 1 => Just(3u32)],
        message(),
        deltas(),
    )
        .prop_map(move |(p, variant, off, lag, parents, message, file_deltas)| {
            let email = match variant {
                0 => uni_email(p),
                1 => uni_email(p).to_uppercase(),
                _ => home_email(p),
            };
            let author_time = at(off);
            CommitRecord {
                id: format!("{idx:040x}"),
                author_name: format!("Student {p}"),
                author_email: email,
                author_time,
                committer_time: author_time + Duration::seconds(lag),
                message,
                parent_count: parents,
                file_deltas,
            }
        })
}

fn text(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(&['a', 'B', ' ', 'é', '日', '\n', '🙂', '#', '1'][..]), 0..max)
        .prop_map(|cs| cs.into_iter().collect())
}

fn issue(persons: usize, window_days: u32, number: u64) -> impl Strategy<Value = IssueRecord> {
    let actor = 0..persons;
    (
        (text(30), text(200)),
        (actor.clone(), actor.clone()),
        (offset_secs(window_days), prop::option::weighted(0.8, offset_secs(window_days))),
        prop::bool::weighted(0.2),
        prop::collection::vec((prop::option::weighted(0.9, actor.clone()), offset_secs(window_days)), 0..5),
        prop::collection::vec((actor, offset_secs(window_days), 0u64..500), 0..5),
    )
        .prop_map(move |((title, body), (opener, closer), (opened, closed), pr, events, comments)| {
            let closed_at = closed.map(at);
            IssueRecord {
                number,
                title,
                body,
                opener: login(opener),
                closer: closed_at.map(|_| login(closer)),
                opened_at: at(opened.max(closed.unwrap_or(0)) + 86_400),
                closed_at,
                is_pull_request: pr,
                events: events
                    .into_iter()
                    .enumerate()
                    .map(|(i, (a, off))| IssueEvent {
                        kind: ["labeled", "assigned", "closed", "referenced"][i % 4].into(),
                        actor: a.map(login),
                        at: at(off),
                    })
                    .collect(),
                comments: comments
                    .into_iter()
                    .map(|(a, off, len)| IssueComment {
                        actor: login(a),
                        at: at(off),
                        length_chars: len,
                    })
                    .collect(),
            }
        })
}

/// Up to 50 commits, 20 issues and 6 persons.
pub fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=6, 1u32..=10, 1u32..=48)
        .prop_flat_map(|(persons, window_days, lm_hours)| {
            let commits = prop::collection::vec(0usize..1, 0..=50).prop_flat_map(move |v| {
                v.iter()
                    .enumerate()
                    .map(|(i, _)| commit(persons, window_days, i))
                    .collect::<Vec<_>>()
            });
            let issues = prop::collection::vec(0usize..1, 0..=20).prop_flat_map(move |v| {
                v.iter()
                    .enumerate()
                    .map(|(i, _)| issue(persons, window_days, i as u64 + 1))
                    .collect::<Vec<_>>()
            });
            (
                Just(persons),
                prop::collection::vec(prop::bool::weighted(0.8), persons),
                Just((window_days, lm_hours)),
                commits,
                issues,
            )
        })
        .prop_map(|(persons, aliased, (window_days, lm_hours), commits, issues)| Instance {
            persons,
            aliased,
            spec: ProjectSpec {
                name: "p".into(),
                repo_source: "org/repo".into(),
                project_end: project_end(),
                window_days,
                last_minute_hours: lm_hours,
            },
            commits,
            issues,
        })
}

/// Arbitrary snapshot contents for round-trip tests.
pub fn snapshot() -> impl Strategy<Value = Snapshot> {
    let time = (0i64..2_000_000_000).prop_map(|s| DateTime::from_timestamp(s, 0).unwrap());
    let login = "[a-z0-9-]{1,12}";
    let event = ("[a-z_]{1,12}".prop_filter("comments are not events", |k| k != "commented"), prop::option::of(login), time.clone())
        .prop_map(|(kind, actor, at)| IssueEvent { kind, actor, at });
    let comment = (login, time.clone(), any::<u64>()).prop_map(|(actor, at, length_chars)| IssueComment {
        actor,
        at,
        length_chars,
    });
    let issue = (
        (1..=u64::MAX, ".{0,40}", "(?s).{0,200}"),
        (login, prop::option::of(login)),
        (time.clone(), prop::option::of(0i64..100_000_000)),
        any::<bool>(),
        prop::collection::vec(event, 0..4),
        prop::collection::vec(comment, 0..4),
    )
        .prop_map(
            |((number, title, body), (opener, closer), (opened_at, close_after), is_pull_request, events, comments)| {
                let closed_at = close_after.map(|s| opened_at + Duration::seconds(s));
                IssueRecord {
                    number,
                    title,
                    body,
                    opener,
                    closer: closed_at.and(closer),
                    opened_at,
                    closed_at,
                    is_pull_request,
                    events,
                    comments,
                }
            },
        );
    ("[a-z]{1,8}/[a-z0-9._-]{1,12}", time, prop::collection::vec(issue, 0..8)).prop_map(
        |(repo_id, fetched_at, mut issues)| {
            // numbers are unique within a snapshot
            issues.sort_by_key(|i| i.number);
            issues.dedup_by_key(|i| i.number);
            for i in &mut issues {
                if i.closed_at.is_some() && i.closer.is_none() {
                    i.closer = Some("ghost".into());
                }
            }
            Snapshot {
                repo_id,
                fetched_at,
                issues,
            }
        },
    )
}
