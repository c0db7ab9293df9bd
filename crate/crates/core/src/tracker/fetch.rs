//! Paginated REST client for GitHub-style issue trackers.
//!
//! Issues, issue events and issue comments are listed repository-wide (three
//! paginated resources, fetched in parallel) and joined on the issue number.

use std::collections::{BTreeMap, HashMap};
use std::thread;
use std::time::Duration as StdDuration;

use chrono::{DateTime, Utc};
use serde::de::{DeserializeOwned, IgnoredAny};
use serde::Deserialize;
use thiserror::Error;

use super::{IssueComment, IssueEvent, IssueRecord, Snapshot};

/// Login used when the service reports no user (deleted accounts).
pub const GHOST_LOGIN: &str = "ghost";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct TransportError(pub String);

/// Blocking HTTP GET. Implementations must be shareable across threads.
pub trait Transport: Sync {
    fn get(&self, url: &str, headers: &[(&str, &str)]) -> Result<HttpResponse, TransportError>;
}

pub trait Clock: Sync {
    fn now(&self) -> DateTime<Utc>;
    fn sleep(&self, d: StdDuration);
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }

    fn sleep(&self, d: StdDuration) {
        thread::sleep(d)
    }
}

#[derive(Debug, Clone)]
pub struct FetchOptions {
    pub base_url: String,
    pub per_page: u32,
    pub max_rate_limit_retries: u32,
    /// Longest single rate-limit wait before giving up.
    pub max_wait: StdDuration,
}

impl Default for FetchOptions {
    fn default() -> Self {
        Self {
            base_url: "https://api.github.com".into(),
            per_page: 100,
            max_rate_limit_retries: 3,
            max_wait: StdDuration::from_secs(3600),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FetchError {
    #[error("{url}: authentication failed (HTTP {status})")]
    Auth { url: String, status: u16 },
    #[error("{url}: rate limit exhausted{}", reset.map(|r| format!(", resets at {r}")).unwrap_or_default())]
    RateLimited {
        url: String,
        reset: Option<DateTime<Utc>>,
    },
    #[error("{url}: transport failure: {reason}")]
    Transport { url: String, reason: String },
    #[error("{url}: malformed payload: {reason}")]
    Malformed { url: String, reason: String },
    #[error("invalid repository id `{0}` (expected owner/name)")]
    InvalidRepo(String),
}

impl FetchError {
    pub fn url(&self) -> Option<&str> {
        match self {
            FetchError::Auth { url, .. }
            | FetchError::RateLimited { url, .. }
            | FetchError::Transport { url, .. }
            | FetchError::Malformed { url, .. } => Some(url),
            FetchError::InvalidRepo(_) => None,
        }
    }
}

#[derive(Deserialize)]
struct ApiUser {
    login: String,
}

#[derive(Deserialize)]
struct ApiIssue {
    number: u64,
    title: String,
    body: Option<String>,
    user: Option<ApiUser>,
    created_at: DateTime<Utc>,
    closed_at: Option<DateTime<Utc>>,
    #[serde(default)]
    closed_by: Option<ApiUser>,
    #[serde(default)]
    pull_request: Option<IgnoredAny>,
}

#[derive(Deserialize)]
struct ApiIssueRef {
    number: u64,
}

#[derive(Deserialize)]
struct ApiEvent {
    event: String,
    actor: Option<ApiUser>,
    created_at: DateTime<Utc>,
    issue: Option<ApiIssueRef>,
}

#[derive(Deserialize)]
struct ApiComment {
    user: Option<ApiUser>,
    created_at: DateTime<Utc>,
    body: Option<String>,
    issue_url: String,
}

struct Client<'a> {
    http: &'a dyn Transport,
    clock: &'a dyn Clock,
    opts: &'a FetchOptions,
    auth: String,
}

impl Client<'_> {
    fn get(&self, url: &str) -> Result<HttpResponse, FetchError> {
        let headers = [
            ("Accept", "application/vnd.github+json"),
            ("Authorization", self.auth.as_str()),
            ("User-Agent", "cohort-miner"),
            ("X-GitHub-Api-Version", "2022-11-28"),
        ];
        let mut retries = 0;
        loop {
            let resp = self
                .http
                .get(url, &headers)
                .map_err(|e| FetchError::Transport {
                    url: url.to_owned(),
                    reason: e.0,
                })?;
            match resp.status {
                200..=299 => return Ok(resp),
                401 => {
                    return Err(FetchError::Auth {
                        url: url.to_owned(),
                        status: resp.status,
                    })
                }
                403 | 429 => {
                    let Some(wait) = self.rate_limit_wait(&resp) else {
                        return Err(FetchError::Auth {
                            url: url.to_owned(),
                            status: resp.status,
                        });
                    };
                    if retries >= self.opts.max_rate_limit_retries || wait > self.opts.max_wait {
                        return Err(FetchError::RateLimited {
                            url: url.to_owned(),
                            reset: reset_time(&resp),
                        });
                    }
                    log::warn!("rate limited on {url}; sleeping {}s", wait.as_secs());
                    self.clock.sleep(wait);
                    retries += 1;
                }
                status => {
                    return Err(FetchError::Transport {
                        url: url.to_owned(),
                        reason: format!("HTTP {status}"),
                    })
                }
            }
        }
    }

    /// How long to back off, or `None` when the response is not a rate-limit signal.
    fn rate_limit_wait(&self, resp: &HttpResponse) -> Option<StdDuration> {
        if let Some(secs) = resp.header("retry-after").and_then(|v| v.trim().parse::<u64>().ok()) {
            return Some(StdDuration::from_secs(secs));
        }
        if resp.header("x-ratelimit-remaining").map(str::trim) != Some("0") {
            return None;
        }
        let wait = reset_time(resp)
            .map(|reset| (reset - self.clock.now()).num_seconds().max(0) as u64 + 1)
            .unwrap_or(60);
        Some(StdDuration::from_secs(wait))
    }

    fn list<T: DeserializeOwned>(&self, first_url: &str) -> Result<Vec<T>, FetchError> {
        let mut items = Vec::new();
        let mut url = first_url.to_owned();
        let mut page = 1u32;
        loop {
            let resp = self.get(&url)?;
            let batch: Vec<T> = serde_json::from_slice(&resp.body).map_err(|e| FetchError::Malformed {
                url: url.clone(),
                reason: e.to_string(),
            })?;
            let full = batch.len() >= self.opts.per_page as usize;
            items.extend(batch);
            match resp.header("link") {
                Some(link) => match next_link(link) {
                    Some(next) => url = next,
                    None => break,
                },
                // no Link header: keep paging while pages come back full
                None if full => {
                    page += 1;
                    url = format!("{first_url}&page={page}");
                }
                None => break,
            }
        }
        Ok(items)
    }
}

fn reset_time(resp: &HttpResponse) -> Option<DateTime<Utc>> {
    resp.header("x-ratelimit-reset")
        .and_then(|v| v.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::from_timestamp(secs, 0))
}

/// Target of the `rel="next"` entry of an RFC 8288 Link header.
fn next_link(header: &str) -> Option<String> {
    header.split(',').find_map(|part| {
        let mut pieces = part.split(';');
        let target = pieces.next()?.trim();
        let is_next = pieces.any(|p| {
            let p = p.trim();
            p == "rel=\"next\"" || p == "rel=next"
        });
        is_next.then(|| target.trim_start_matches('<').trim_end_matches('>').to_owned())
    })
}

fn login(user: Option<ApiUser>) -> String {
    user.map_or_else(|| GHOST_LOGIN.to_owned(), |u| u.login)
}

fn issue_number_from_url(url: &str) -> Option<u64> {
    url.rsplit('/').next()?.parse().ok()
}

/// Downloads every issue of `repo_id` with its events and comments.
pub fn fetch_snapshot(
    repo_id: &str,
    auth_token: &str,
    http: &dyn Transport,
    clock: &dyn Clock,
    opts: &FetchOptions,
) -> Result<Snapshot, FetchError> {
    let valid = repo_id
        .split_once('/')
        .is_some_and(|(o, n)| !o.is_empty() && !n.is_empty() && !n.contains('/'));
    if !valid {
        return Err(FetchError::InvalidRepo(repo_id.to_owned()));
    }
    let client = Client {
        http,
        clock,
        opts,
        auth: format!("Bearer {auth_token}"),
    };
    let base = format!("{}/repos/{repo_id}", opts.base_url.trim_end_matches('/'));
    let per_page = opts.per_page;
    let issues_url = format!("{base}/issues?state=all&per_page={per_page}");
    let events_url = format!("{base}/issues/events?per_page={per_page}");
    let comments_url = format!("{base}/issues/comments?per_page={per_page}");

    let (issues, events, comments) = thread::scope(|s| {
        let issues = s.spawn(|| client.list::<ApiIssue>(&issues_url));
        let events = s.spawn(|| client.list::<ApiEvent>(&events_url));
        let comments = client.list::<ApiComment>(&comments_url);
        (
            issues.join().expect("issue listing thread panicked"),
            events.join().expect("event listing thread panicked"),
            comments,
        )
    });
    let (issues, events, comments) = (issues?, events?, comments?);

    let mut events_by_issue: HashMap<u64, Vec<IssueEvent>> = HashMap::new();
    for ev in events {
        let Some(issue) = ev.issue else { continue };
        if ev.event.is_empty() || ev.event == "commented" {
            continue;
        }
        events_by_issue.entry(issue.number).or_default().push(IssueEvent {
            kind: ev.event,
            actor: ev.actor.map(|u| u.login),
            at: ev.created_at,
        });
    }
    let mut comments_by_issue: HashMap<u64, Vec<IssueComment>> = HashMap::new();
    for c in comments {
        let number = issue_number_from_url(&c.issue_url).ok_or_else(|| FetchError::Malformed {
            url: comments_url.clone(),
            reason: format!("cannot read issue number from `{}`", c.issue_url),
        })?;
        comments_by_issue.entry(number).or_default().push(IssueComment {
            actor: login(c.user),
            at: c.created_at,
            length_chars: c.body.as_deref().map_or(0, |b| b.chars().count() as u64),
        });
    }

    let mut records: BTreeMap<u64, IssueRecord> = BTreeMap::new();
    for issue in issues {
        if records.contains_key(&issue.number) {
            continue;
        }
        let mut events = events_by_issue.remove(&issue.number).unwrap_or_default();
        events.sort_by_key(|e| e.at);
        let mut comments = comments_by_issue.remove(&issue.number).unwrap_or_default();
        comments.sort_by_key(|c| c.at);

        let closer = issue.closed_at.map(|_| match issue.closed_by {
            Some(u) => u.login,
            None => events
                .iter()
                .rev()
                .find(|e| e.kind == "closed")
                .and_then(|e| e.actor.clone())
                .unwrap_or_else(|| GHOST_LOGIN.to_owned()),
        });
        records.insert(
            issue.number,
            IssueRecord {
                number: issue.number,
                title: issue.title,
                body: issue.body.unwrap_or_default(),
                opener: login(issue.user),
                closer,
                opened_at: issue.created_at,
                closed_at: issue.closed_at,
                is_pull_request: issue.pull_request.is_some(),
                events,
                comments,
            },
        );
    }

    Ok(Snapshot {
        repo_id: repo_id.to_owned(),
        fetched_at: clock.now(),
        issues: records.into_values().collect(),
    })
}
