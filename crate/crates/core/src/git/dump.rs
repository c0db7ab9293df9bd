use std::collections::HashSet;
use std::io::{self, BufRead, Write};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use chrono::{DateTime, SecondsFormat, Utc};
use thiserror::Error;

use super::{is_valid_commit_id, CommitRecord, FileDelta, LineCount};

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: record for commit {id} is truncated at end of input")]
    Truncated { line: usize, id: String },
    #[error("reading commit dump: {0}")]
    Io(#[from] io::Error),
}

impl DumpError {
    pub fn line(&self) -> Option<usize> {
        match self {
            DumpError::Malformed { line, .. } | DumpError::Truncated { line, .. } => Some(*line),
            DumpError::Io(_) => None,
        }
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> DumpError {
    DumpError::Malformed {
        line,
        reason: reason.into(),
    }
}

enum State {
    Between,
    AwaitMessage(CommitRecord),
    Deltas(CommitRecord, HashSet<String>),
}

/// Parses a commit dump. Records come back in stream order.
pub fn parse_commit_log<R: BufRead>(mut input: R) -> Result<Vec<CommitRecord>, DumpError> {
    let mut records = Vec::new();
    let mut state = State::Between;
    let mut buf = Vec::new();
    let mut lineno = 0usize;

    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        lineno += 1;
        let mut line: &[u8] = &buf;
        if let Some(stripped) = line.strip_suffix(b"\n") {
            line = stripped;
        }
        if let Some(stripped) = line.strip_suffix(b"\r") {
            line = stripped;
        }

        state = match state {
            State::Between => {
                if line.is_empty() {
                    State::Between
                } else {
                    State::AwaitMessage(parse_header(line, lineno)?)
                }
            }
            State::AwaitMessage(mut rec) => {
                let encoded = line
                    .strip_prefix(b"M|")
                    .ok_or_else(|| malformed(lineno, "expected `M|<base64 message>` line"))?;
                let bytes = BASE64
                    .decode(encoded)
                    .map_err(|e| malformed(lineno, format!("message is not valid base64: {e}")))?;
                rec.message = String::from_utf8(bytes)
                    .map_err(|_| malformed(lineno, "decoded message is not valid UTF-8"))?;
                State::Deltas(rec, HashSet::new())
            }
            State::Deltas(mut rec, mut paths) => {
                if line.is_empty() {
                    records.push(rec);
                    State::Between
                } else {
                    let delta = parse_numstat(line, lineno)?;
                    if !paths.insert(delta.path.clone()) {
                        return Err(malformed(
                            lineno,
                            format!("path `{}` appears twice in commit {}", delta.path, rec.id),
                        ));
                    }
                    rec.file_deltas.push(delta);
                    State::Deltas(rec, paths)
                }
            }
        };
    }

    match state {
        State::Between => Ok(records),
        State::AwaitMessage(rec) | State::Deltas(rec, _) => Err(DumpError::Truncated {
            line: lineno,
            id: rec.id,
        }),
    }
}

fn parse_header(line: &[u8], lineno: usize) -> Result<CommitRecord, DumpError> {
    let text = std::str::from_utf8(line)
        .map_err(|_| malformed(lineno, "commit header is not valid UTF-8"))?;
    let rest = text
        .strip_prefix("C|")
        .ok_or_else(|| malformed(lineno, "expected commit header starting with `C|`"))?;
    let (id, rest) = rest
        .split_once('|')
        .ok_or_else(|| malformed(lineno, "commit header has too few fields"))?;
    if !is_valid_commit_id(id) {
        return Err(malformed(
            lineno,
            format!("`{id}` is not a 40-character lowercase hex commit id"),
        ));
    }
    // author name may contain `|`; everything else is split from the right
    let mut tail = rest.rsplitn(5, '|');
    let parents = tail.next();
    let committer_time = tail.next();
    let author_time = tail.next();
    let email = tail.next();
    let name = tail.next();
    let (Some(name), Some(email), Some(author_time), Some(committer_time), Some(parents)) =
        (name, email, author_time, committer_time, parents)
    else {
        return Err(malformed(lineno, "commit header has too few fields"));
    };

    let parent_count = parents
        .parse::<u32>()
        .map_err(|_| malformed(lineno, format!("parent count `{parents}` is not a non-negative integer")))?;

    Ok(CommitRecord {
        id: id.to_owned(),
        author_name: name.to_owned(),
        author_email: email.to_owned(),
        author_time: parse_time(author_time, lineno)?,
        committer_time: parse_time(committer_time, lineno)?,
        message: String::new(),
        parent_count,
        file_deltas: Vec::new(),
    })
}

fn parse_time(s: &str, lineno: usize) -> Result<DateTime<Utc>, DumpError> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| malformed(lineno, format!("bad timestamp `{s}`: {e}")))
}

fn parse_numstat(line: &[u8], lineno: usize) -> Result<FileDelta, DumpError> {
    let mut parts = line.splitn(3, |b| *b == b'\t');
    let (Some(added), Some(deleted), Some(path)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(malformed(lineno, "numstat line needs `<added>\\t<deleted>\\t<path>`"));
    };
    if path.is_empty() {
        return Err(malformed(lineno, "numstat line has an empty path"));
    }
    Ok(FileDelta {
        path: String::from_utf8_lossy(path).into_owned(),
        lines_added: parse_count(added, lineno)?,
        lines_deleted: parse_count(deleted, lineno)?,
    })
}

fn parse_count(field: &[u8], lineno: usize) -> Result<LineCount, DumpError> {
    if field == b"-" {
        return Ok(None);
    }
    std::str::from_utf8(field)
        .ok()
        .filter(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|s| s.parse::<u64>().ok())
        .map(Some)
        .ok_or_else(|| {
            malformed(
                lineno,
                format!("line count `{}` is neither a number nor `-`", String::from_utf8_lossy(field)),
            )
        })
}

fn count_field(c: LineCount) -> String {
    c.map_or_else(|| "-".to_owned(), |n| n.to_string())
}

/// Writes records in the dump layout accepted by [`parse_commit_log`].
pub fn write_commit_log<W: Write>(records: &[CommitRecord], mut out: W) -> io::Result<()> {
    for r in records {
        writeln!(
            out,
            "C|{}|{}|{}|{}|{}|{}",
            r.id,
            r.author_name,
            r.author_email,
            r.author_time.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            r.committer_time.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            r.parent_count
        )?;
        writeln!(out, "M|{}", BASE64.encode(r.message.as_bytes()))?;
        for d in &r.file_deltas {
            writeln!(
                out,
                "{}\t{}\t{}",
                count_field(d.lines_added),
                count_field(d.lines_deleted),
                d.path
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}
