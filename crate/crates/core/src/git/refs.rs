use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// How commit messages are scanned for issue references.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefsMode {
    /// Every standalone `#<digits>` token.
    #[default]
    Any,
    /// Only tokens introduced by a closing keyword (`fixes #3`, `closed issue #12`),
    /// plus tokens continuing such a list (`fixes #3, #4 and #5`).
    Keyword,
}

const KEYWORDS: &[&str] = &[
    "fix", "fixes", "fixed", "close", "closes", "closed", "resolve", "resolves", "resolved",
];

/// Distinct issue numbers referenced as `#N` in `message`.
pub fn extract_issue_refs(message: &str) -> BTreeSet<u64> {
    extract_issue_refs_with(message, RefsMode::Any)
}

pub fn extract_issue_refs_with(message: &str, mode: RefsMode) -> BTreeSet<u64> {
    let mut refs = BTreeSet::new();
    let mut prev: Option<char> = None;
    let mut last_accepted_end: Option<usize> = None;

    let mut iter = message.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        let standalone = c == '#' && !prev.is_some_and(char::is_alphanumeric);
        prev = Some(c);
        if !standalone {
            continue;
        }
        let digits_start = i + 1;
        let mut digits_end = digits_start;
        while let Some(&(j, d)) = iter.peek() {
            if !d.is_ascii_digit() {
                break;
            }
            digits_end = j + 1;
            prev = Some(d);
            iter.next();
        }
        if digits_end == digits_start {
            continue;
        }
        let accepted = match mode {
            RefsMode::Any => true,
            RefsMode::Keyword => {
                introduced_by_keyword(&message[..i])
                    || last_accepted_end.is_some_and(|end| continues_list(&message[end..i]))
            }
        };
        if !accepted {
            continue;
        }
        // `#0` is not an issue; overlong numbers cannot be one either
        if let Ok(n) = message[digits_start..digits_end].parse::<u64>() {
            if n > 0 {
                refs.insert(n);
                last_accepted_end = Some(digits_end);
            }
        }
    }
    refs
}

fn introduced_by_keyword(before: &str) -> bool {
    let mut s = before.trim_end();
    s = s.strip_suffix(':').unwrap_or(s).trim_end();
    let lower = s.to_lowercase();
    let mut s = lower.as_str();
    for noun in ["issues", "issue"] {
        if let Some(rest) = s.strip_suffix(noun) {
            if !rest.ends_with(char::is_alphanumeric) {
                s = rest.trim_end();
                s = s.strip_suffix(':').unwrap_or(s).trim_end();
                break;
            }
        }
    }
    let word_start = s
        .char_indices()
        .rev()
        .find(|(_, c)| !c.is_alphabetic())
        .map_or(0, |(i, c)| i + c.len_utf8());
    KEYWORDS.contains(&&s[word_start..])
}

fn continues_list(between: &str) -> bool {
    let rest = between.trim().trim_start_matches(',').trim();
    rest.is_empty() || rest.eq_ignore_ascii_case("and")
}
