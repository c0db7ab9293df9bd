//! Scripted transport and clock for fetch tests. No sockets are opened.

use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;
use std::time::Duration as StdDuration;

use chrono::{DateTime, TimeZone, Utc};
use serde_json::{json, Value};

use cohort_miner::tracker::{Clock, HttpResponse, Transport, TransportError};

pub const BASE: &str = "https://tracker.test/api";

type Headers = Vec<(String, String)>;

#[derive(Default)]
pub struct MockTransport {
    /// Responses per exact URL, served in order; the last one repeats.
    script: Mutex<HashMap<String, VecDeque<HttpResponse>>>,
    log: Mutex<Vec<(String, Headers)>>,
}

impl MockTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn on(&self, url: &str, resp: HttpResponse) -> &Self {
        self.script
            .lock()
            .unwrap()
            .entry(url.to_owned())
            .or_default()
            .push_back(resp);
        self
    }

    pub fn requests(&self) -> Vec<String> {
        self.log.lock().unwrap().iter().map(|(u, _)| u.clone()).collect()
    }

    pub fn requests_to(&self, prefix: &str) -> usize {
        self.requests().iter().filter(|u| u.starts_with(prefix)).count()
    }

    pub fn headers_of(&self, idx: usize) -> Headers {
        self.log.lock().unwrap()[idx].1.clone()
    }
}

impl Transport for MockTransport {
    fn get(&self, url: &str, headers: &[(&str, &str)]) -> Result<HttpResponse, TransportError> {
        self.log.lock().unwrap().push((
            url.to_owned(),
            headers.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        ));
        let mut script = self.script.lock().unwrap();
        match script.get_mut(url) {
            Some(q) if q.len() > 1 => Ok(q.pop_front().unwrap()),
            Some(q) => Ok(q.front().cloned().unwrap()),
            None => Ok(HttpResponse {
                status: 404,
                headers: vec![],
                body: b"{\"message\":\"Not Found\"}".to_vec(),
            }),
        }
    }
}

pub struct FakeClock {
    pub now: DateTime<Utc>,
    pub slept: Mutex<Vec<StdDuration>>,
}

impl FakeClock {
    pub fn new() -> Self {
        Self {
            now: Utc.with_ymd_and_hms(2018, 3, 1, 12, 0, 0).unwrap(),
            slept: Mutex::new(Vec::new()),
        }
    }

    pub fn sleeps(&self) -> Vec<StdDuration> {
        self.slept.lock().unwrap().clone()
    }
}

impl Default for FakeClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for FakeClock {
    fn now(&self) -> DateTime<Utc> {
        self.now
    }

    fn sleep(&self, d: StdDuration) {
        self.slept.lock().unwrap().push(d);
    }
}

pub fn ok(body: &Value, headers: &[(&str, &str)]) -> HttpResponse {
    HttpResponse {
        status: 200,
        headers: headers.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        body: serde_json::to_vec(body).unwrap(),
    }
}

pub fn status(code: u16, headers: &[(&str, &str)]) -> HttpResponse {
    HttpResponse {
        status: code,
        headers: headers.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        body: br#"{"message":"scripted"}"#.to_vec(),
    }
}

pub fn repo_url(repo: &str) -> String {
    format!("{BASE}/repos/{repo}")
}

pub fn issues_url(repo: &str, per_page: u32) -> String {
    format!("{}/issues?state=all&per_page={per_page}", repo_url(repo))
}

pub fn events_url(repo: &str, per_page: u32) -> String {
    format!("{}/issues/events?per_page={per_page}", repo_url(repo))
}

pub fn comments_url(repo: &str, per_page: u32) -> String {
    format!("{}/issues/comments?per_page={per_page}", repo_url(repo))
}

/// Issue payload shaped like the tracker's list response. Pull requests carry a
/// `pull_request` object; closed items name their closer.
pub fn api_issue(number: u64, pull_request: bool, closed: bool) -> Value {
    let mut v = json!({
        "number": number,
        "title": format!("Item {number}"),
        "body": if number.is_multiple_of(3) { Value::Null } else { json!(format!("Body of {number} · ü")) },
        "user": { "login": format!("user{}", number % 4) },
        "created_at": "2018-01-10T10:00:00Z",
        "closed_at": if closed { json!("2018-02-05T10:00:00Z") } else { Value::Null },
        "state": if closed { "closed" } else { "open" },
        "labels": [],
        "comments": 0,
    });
    if closed {
        v["closed_by"] = json!({ "login": format!("user{}", (number + 1) % 4) });
    }
    if pull_request {
        v["pull_request"] = json!({ "url": format!("{}/pulls/{number}", repo_url("o/r")) });
    }
    v
}

pub fn api_event(issue: u64, kind: &str, actor: Option<&str>, at: &str) -> Value {
    json!({
        "id": issue * 1000,
        "event": kind,
        "actor": actor.map(|a| json!({ "login": a })),
        "created_at": at,
        "issue": { "number": issue },
    })
}

pub fn api_comment(repo: &str, issue: u64, user: &str, body: &str, at: &str) -> Value {
    json!({
        "id": issue * 7,
        "user": { "login": user },
        "body": body,
        "created_at": at,
        "issue_url": format!("{}/issues/{issue}", repo_url(repo)),
    })
}

/// Scripts `total` issues over pages of `per_page`, linked with `rel="next"`.
/// Every seventh issue is a pull request; every fifth stays open.
pub fn script_paged_issues(t: &MockTransport, repo: &str, total: u64, per_page: u32) {
    let items: Vec<Value> = (1..=total).map(|n| api_issue(n, n % 7 == 0, n % 5 != 0)).collect();
    let mut pages: Vec<&[Value]> = items.chunks(per_page as usize).collect();
    if pages.is_empty() {
        pages.push(&[]);
    }
    let first = issues_url(repo, per_page);
    for (i, page) in pages.iter().enumerate() {
        let url = if i == 0 {
            first.clone()
        } else {
            format!("{first}&page={}", i + 1)
        };
        let link = if i + 1 < pages.len() {
            format!(
                "<{first}&page={}>; rel=\"next\", <{first}&page={}>; rel=\"last\"",
                i + 2,
                pages.len()
            )
        } else {
            format!("<{first}&page=1>; rel=\"first\"")
        };
        t.on(&url, ok(&Value::Array(page.to_vec()), &[("Link", &link)]));
    }
    t.on(&events_url(repo, per_page), ok(&json!([]), &[]));
    t.on(&comments_url(repo, per_page), ok(&json!([]), &[]));
}
