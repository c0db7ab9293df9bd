//! Alias map: the hand-maintained table that merges accounts of one person.
//!
//! ```text
//! # one entry per contributor
//! [contributors]
//! alice = email:alice@uni.example, login:alice-gh, exact:Alice Smith <alice@home.example>
//! bob   = email:bob@uni.example
//!
//! # accounts left out of contributor counts (tutors, bots)
//! [exclude]
//! login:tutor-account
//! id:bob
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::RawActor;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct AliasError {
    pub line: Option<usize>,
    pub reason: String,
}

impl fmt::Display for AliasError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

fn err(line: Option<usize>, reason: impl Into<String>) -> AliasError {
    AliasError {
        line,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Matcher {
    /// Case-insensitive e-mail address (stored lowercased).
    Email(String),
    Login(String),
    /// Exact author name together with a case-insensitive e-mail address.
    Exact { name: String, email: String },
}

impl Matcher {
    pub fn email(e: &str) -> Self {
        Matcher::Email(e.trim().to_lowercase())
    }

    pub fn login(l: &str) -> Self {
        Matcher::Login(l.trim().to_owned())
    }

    pub fn exact(name: &str, email: &str) -> Self {
        Matcher::Exact {
            name: name.trim().to_owned(),
            email: email.trim().to_lowercase(),
        }
    }

    pub fn matches(&self, a: &RawActor) -> bool {
        match self {
            Matcher::Email(e) => a.email_key().as_deref() == Some(e.as_str()),
            Matcher::Login(l) => a.login.as_deref() == Some(l.as_str()),
            Matcher::Exact { name, email } => {
                a.name.as_deref() == Some(name.as_str())
                    && a.email_key().as_deref() == Some(email.as_str())
            }
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Matcher::Exact { .. } => 0,
            Matcher::Email(_) => 1,
            Matcher::Login(_) => 2,
        }
    }

    fn parse(text: &str) -> Result<Self, String> {
        let (kind, value) = text
            .split_once(':')
            .ok_or_else(|| format!("matcher `{text}` needs a `kind:` prefix"))?;
        let value = value.trim();
        if value.is_empty() {
            return Err(format!("matcher `{text}` has an empty value"));
        }
        match kind.trim() {
            "email" => Ok(Matcher::email(value)),
            "login" => Ok(Matcher::login(value)),
            "exact" => {
                let (name, rest) = value
                    .rsplit_once('<')
                    .ok_or_else(|| format!("exact matcher `{value}` must look like `Name <email>`"))?;
                let email = rest
                    .strip_suffix('>')
                    .ok_or_else(|| format!("exact matcher `{value}` is missing `>`"))?;
                if name.trim().is_empty() || email.trim().is_empty() {
                    return Err(format!("exact matcher `{value}` needs both a name and an e-mail"));
                }
                Ok(Matcher::exact(name, email))
            }
            other => Err(format!("unknown matcher kind `{other}` (expected email, login or exact)")),
        }
    }
}

impl fmt::Display for Matcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Matcher::Email(e) => write!(f, "email:{e}"),
            Matcher::Login(l) => write!(f, "login:{l}"),
            Matcher::Exact { name, email } => write!(f, "exact:{name} <{email}>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AliasMap {
    entries: BTreeMap<String, Vec<Matcher>>,
    exclude: Vec<Matcher>,
    exclude_ids: BTreeSet<String>,
}

impl AliasMap {
    pub fn entries(&self) -> &BTreeMap<String, Vec<Matcher>> {
        &self.entries
    }

    /// Adds matchers to contributor `id`, rejecting matchers owned by another id.
    pub fn insert(&mut self, id: &str, matchers: Vec<Matcher>) -> Result<(), AliasError> {
        for m in &matchers {
            if let Some(owner) = self.owner_of(m) {
                if owner != id {
                    return Err(err(None, format!("`{m}` is already assigned to `{owner}`")));
                }
            }
        }
        let slot = self.entries.entry(id.to_owned()).or_default();
        for m in matchers {
            if !slot.contains(&m) {
                slot.push(m);
            }
        }
        Ok(())
    }

    pub fn exclude(&mut self, m: Matcher) {
        self.exclude.push(m);
    }

    pub fn exclude_id(&mut self, id: &str) {
        self.exclude_ids.insert(id.to_owned());
    }

    /// Moves every matcher of `absorbed` under `kept`.
    pub fn merge_entries(&mut self, kept: &str, absorbed: &str) {
        if kept == absorbed {
            return;
        }
        if let Some(ms) = self.entries.remove(absorbed) {
            self.entries.entry(kept.to_owned()).or_default().extend(ms);
        }
    }

    fn owner_of(&self, m: &Matcher) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, ms)| ms.contains(m))
            .map(|(id, _)| id.as_str())
    }

    pub fn validate(&self) -> Result<(), AliasError> {
        let mut owners: BTreeMap<&Matcher, &str> = BTreeMap::new();
        for (id, ms) in &self.entries {
            for m in ms {
                if let Some(prev) = owners.insert(m, id) {
                    if prev != id {
                        return Err(err(None, format!("`{m}` appears under both `{prev}` and `{id}`")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Canonical id from the strongest matching matcher (exact, then e-mail, then login).
    pub(crate) fn lookup(&self, a: &RawActor) -> Option<&str> {
        self.entries
            .iter()
            .flat_map(|(id, ms)| ms.iter().map(move |m| (m, id)))
            .filter(|(m, _)| m.matches(a))
            .min_by(|(m1, id1), (m2, id2)| m1.rank().cmp(&m2.rank()).then(id1.cmp(id2)))
            .map(|(_, id)| id.as_str())
    }

    pub(crate) fn is_excluded(&self, a: &RawActor, id: &str) -> bool {
        self.exclude_ids.contains(id) || self.exclude.iter().any(|m| m.matches(a))
    }

    pub fn parse(text: &str) -> Result<Self, AliasError> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Contributors,
            Exclude,
        }
        let mut map = AliasMap::default();
        let mut section = Section::None;
        let mut seen_ids = BTreeSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = Some(idx + 1);
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                section = match line {
                    "[contributors]" => Section::Contributors,
                    "[exclude]" => Section::Exclude,
                    other => return Err(err(lineno, format!("unknown section `{other}`"))),
                };
                continue;
            }
            match section {
                Section::None => {
                    return Err(err(lineno, "entry outside of a [contributors] or [exclude] section"))
                }
                Section::Contributors => {
                    let (id, rest) = line
                        .split_once('=')
                        .ok_or_else(|| err(lineno, "expected `<id> = <matcher>, ...`"))?;
                    let id = id.trim();
                    if id.is_empty() || id.contains(char::is_whitespace) {
                        return Err(err(lineno, format!("invalid contributor id `{id}`")));
                    }
                    if !seen_ids.insert(id.to_owned()) {
                        return Err(err(lineno, format!("contributor `{id}` is listed twice")));
                    }
                    let matchers = rest
                        .split(',')
                        .map(|m| Matcher::parse(m.trim()).map_err(|r| err(lineno, r)))
                        .collect::<Result<Vec<_>, _>>()?;
                    map.insert(id, matchers).map_err(|e| err(lineno, e.reason))?;
                }
                Section::Exclude => {
                    if let Some(id) = line.strip_prefix("id:") {
                        map.exclude_id(id.trim());
                    } else {
                        map.exclude(Matcher::parse(line).map_err(|r| err(lineno, r))?);
                    }
                }
            }
        }
        Ok(map)
    }
}

impl fmt::Display for AliasMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[contributors]")?;
        for (id, ms) in &self.entries {
            let ms: Vec<String> = ms.iter().map(ToString::to_string).collect();
            writeln!(f, "{id} = {}", ms.join(", "))?;
        }
        if !self.exclude.is_empty() || !self.exclude_ids.is_empty() {
            writeln!(f, "[exclude]")?;
            for m in &self.exclude {
                writeln!(f, "{m}")?;
            }
            for id in &self.exclude_ids {
                writeln!(f, "id:{id}")?;
            }
        }
        Ok(())
    }
}
