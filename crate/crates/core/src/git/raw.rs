//! Conversion from raw `git log` output to the commit dump layout.

use std::io::Write;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;

use super::dump::DumpError;

/// Pretty format: records start with RS (0x1e), fields end with US (0x1f); numstat
/// lines follow the last field.
pub const RAW_LOG_FORMAT: &str = "%x1eC%x1f%H%x1f%an%x1f%ae%x1f%aI%x1f%cI%x1f%P%x1f%B%x1f";

/// Arguments for `git` that produce input for [`convert_raw_log`].
pub fn git_log_args(repo: &str) -> Vec<String> {
    [
        "-C",
        repo,
        "-c",
        "core.quotepath=off",
        "log",
        "--no-renames",
        "--numstat",
        "--date=iso-strict",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain(std::iter::once(format!("--format=tformat:{RAW_LOG_FORMAT}")))
    .collect()
}

/// Rewrites raw log output into the dump layout, returning the number of commits.
pub fn convert_raw_log<W: Write>(raw: &[u8], mut out: W) -> Result<usize, DumpError> {
    let mut count = 0;
    for (idx, chunk) in raw.split(|b| *b == 0x1e).enumerate() {
        if idx == 0 {
            if chunk.iter().any(|b| !b.is_ascii_whitespace()) {
                return Err(raw_error(count, "unexpected data before first record"));
            }
            continue;
        }
        let mut fields = chunk.splitn(8, |b| *b == 0x1f);
        let mut next = || fields.next().ok_or_else(|| raw_error(count, "record has too few fields"));
        let tag = next()?;
        if tag != b"C" {
            return Err(raw_error(count, "record does not start with the `C` tag"));
        }
        let id = utf8(next()?, count)?;
        let name = utf8(next()?, count)?;
        let email = utf8(next()?, count)?;
        let author_time = utf8(next()?, count)?;
        let committer_time = utf8(next()?, count)?;
        let parents = utf8(next()?, count)?;
        let body = next()?;

        // message may itself contain US; the numstat block follows the last one
        let split = body
            .iter()
            .rposition(|b| *b == 0x1f)
            .ok_or_else(|| raw_error(count, "record is missing its message terminator"))?;
        let message = String::from_utf8_lossy(&body[..split]);
        let message = message.trim_end_matches('\n');
        let numstat = &body[split + 1..];

        let parent_count = parents.split_whitespace().count();
        writeln!(
            out,
            "C|{id}|{name}|{email}|{author_time}|{committer_time}|{parent_count}"
        )?;
        writeln!(out, "M|{}", BASE64.encode(message.as_bytes()))?;
        for line in numstat.split(|b| *b == b'\n') {
            let line = line.strip_suffix(b"\r").unwrap_or(line);
            if line.is_empty() {
                continue;
            }
            out.write_all(line)?;
            out.write_all(b"\n")?;
        }
        writeln!(out)?;
        count += 1;
    }
    Ok(count)
}

fn utf8(field: &[u8], record: usize) -> Result<&str, DumpError> {
    std::str::from_utf8(field).map_err(|_| raw_error(record, "header field is not valid UTF-8"))
}

fn raw_error(record: usize, reason: &str) -> DumpError {
    DumpError::Malformed {
        line: 0,
        reason: format!("raw log record {}: {reason}", record + 1),
    }
}
