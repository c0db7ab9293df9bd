#![allow(dead_code)]

use std::path::{Path, PathBuf};

use cohort_miner::tracker::Transport;

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(rel: &str) -> String {
    fixtures().join(rel).display().to_string()
}

struct Offline;

impl Transport for Offline {
    fn get(
        &self,
        url: &str,
        _: &[(&str, &str)],
    ) -> Result<cohort_miner::tracker::HttpResponse, cohort_miner::tracker::TransportError> {
        panic!("unexpected request to {url}")
    }
}

pub fn run(args: &[&str]) -> Outcome {
    run_via(args, None, &Offline)
}

pub fn run_via(args: &[&str], token: Option<&str>, http: &dyn Transport) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cohort-miner").chain(args.iter().copied());
    let code = cohort_miner_cli::run_with(argv, token, http, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

/// Parses the value rows of every machine-format table.
pub fn machine_rows(text: &str) -> Vec<Vec<(String, Vec<f64>)>> {
    cohort_miner::report::parse_machine(text)
        .unwrap()
        .into_iter()
        .map(|t| {
            t.rows
                .into_iter()
                .map(|r| (r.label, r.cells.into_iter().map(|c| c.unwrap_or(f64::NAN)).collect()))
                .collect()
        })
        .collect()
}

/// Checks `compare --format machine` output against the independent oracle's golden file.
pub fn check_against_golden(machine: &str) -> Result<(), String> {
    let golden: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("golden.json")).unwrap()).unwrap();
    let tables = machine_rows(machine);
    if tables.len() != 3 {
        return Err(format!("expected 3 tables, got {}", tables.len()));
    }
    let keys: [&[&str]; 3] = [
        &["body.mean", "body.stdev", "body.median", "title.mean", "title.stdev", "title.median"],
        &[
            "commit.commit_amount",
            "commit.touched_files",
            "commit.last_minute_commits",
            "commit.line_changes_per_commit",
            "commit.unique_issues_referenced",
        ],
        &[
            "issue.issue_amount",
            "issue.issue_events",
            "issue.issue_comments",
            "issue.pct_same_open_close",
        ],
    ];
    for (table, keys) in tables.iter().zip(keys) {
        for (row, want) in table.iter().zip(golden["cohorts"].as_array().unwrap()) {
            if row.0 != want["label"].as_str().unwrap() {
                return Err(format!("row {} vs {}", row.0, want["label"]));
            }
            for (got, key) in row.1.iter().zip(keys) {
                let mut v = if key.starts_with("body") || key.starts_with("title") {
                    &want["text"]
                } else {
                    want
                };
                for part in key.split('.') {
                    v = &v[part];
                }
                let w = v.as_f64().unwrap();
                if (got - w).abs() > 1e-9 * w.abs().max(1.0) {
                    return Err(format!("{} {key}: {got} vs {w}", row.0));
                }
            }
        }
    }
    Ok(())
}
