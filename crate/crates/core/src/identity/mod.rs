//! Contributor identity resolution.
//!
//! Raw commit authors and tracker logins are bound to canonical contributor ids.
//! Precedence: an explicit alias-map matcher, then a shared e-mail address
//! (case-insensitive), then a shared login. Names alone never merge identities.

mod alias;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::git::CommitRecord;
use crate::tracker::IssueRecord;

pub use alias::{AliasError, AliasMap, Matcher};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdentityError {
    #[error("alias map: {0}")]
    Alias(#[from] AliasError),
    #[error("actor {0:?} has neither an e-mail address nor a login")]
    Anonymous(RawActor),
    #[error("no active contributors in the study window{}", project.as_ref().map(|p| format!(" of project `{p}`")).unwrap_or_default())]
    EmptyWindow { project: Option<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActorSource {
    Commit,
    Tracker,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RawActor {
    pub source: ActorSource,
    pub name: Option<String>,
    pub email: Option<String>,
    pub login: Option<String>,
}

fn non_empty(s: &str) -> Option<String> {
    let s = s.trim();
    (!s.is_empty()).then(|| s.to_owned())
}

impl RawActor {
    pub fn commit_author(name: &str, email: &str) -> Self {
        Self {
            source: ActorSource::Commit,
            name: non_empty(name),
            email: non_empty(email),
            login: None,
        }
    }

    pub fn tracker(login: &str) -> Self {
        Self {
            source: ActorSource::Tracker,
            name: None,
            email: None,
            login: non_empty(login),
        }
    }

    pub fn of_commit(c: &CommitRecord) -> Self {
        Self::commit_author(&c.author_name, &c.author_email)
    }

    pub(crate) fn email_key(&self) -> Option<String> {
        self.email.as_deref().map(str::to_lowercase)
    }

    /// Id for an actor that matches nothing else.
    pub fn fresh_id(&self) -> Option<String> {
        self.email_key()
            .map(|e| format!("email:{e}"))
            .or_else(|| self.login.as_ref().map(|l| format!("login:{l}")))
    }
}

/// Deduplicated contributors and the binding from raw actors to them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContributorSet {
    contributors: BTreeSet<String>,
    binding: BTreeMap<RawActor, String>,
    excluded: BTreeSet<String>,
}

impl ContributorSet {
    pub fn contributors(&self) -> &BTreeSet<String> {
        &self.contributors
    }

    pub fn binding(&self) -> &BTreeMap<RawActor, String> {
        &self.binding
    }

    pub fn excluded(&self) -> &BTreeSet<String> {
        &self.excluded
    }

    pub fn len(&self) -> usize {
        self.contributors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contributors.is_empty()
    }

    /// Canonical id of `actor`; actors outside the binding get their fresh id.
    pub fn id_of(&self, actor: &RawActor) -> Option<String> {
        self.binding
            .get(actor)
            .cloned()
            .or_else(|| actor.fresh_id())
    }

    pub fn id_of_login(&self, login: &str) -> Option<String> {
        self.id_of(&RawActor::tracker(login))
    }

    pub fn is_excluded(&self, id: &str) -> bool {
        self.excluded.contains(id)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Binds every actor to exactly one canonical contributor id.
pub fn resolve(actors: &[RawActor], aliases: &AliasMap) -> Result<ContributorSet, IdentityError> {
    aliases.validate()?;
    let actors: BTreeSet<&RawActor> = actors.iter().collect();
    if let Some(a) = actors.iter().find(|a| a.email.is_none() && a.login.is_none()) {
        return Err(IdentityError::Anonymous((*a).clone()));
    }

    let mut binding: BTreeMap<RawActor, String> = BTreeMap::new();
    let mut unaliased: Vec<&RawActor> = Vec::new();
    for a in &actors {
        match aliases.lookup(a) {
            Some(id) => {
                binding.insert((*a).clone(), id.to_owned());
            }
            None => unaliased.push(a),
        }
    }

    // keys held by alias-bound actors, for attaching unaliased components
    let mut aliased_email: HashMap<String, BTreeSet<&str>> = HashMap::new();
    let mut aliased_login: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for (a, id) in &binding {
        if let Some(e) = a.email_key() {
            aliased_email.entry(e).or_default().insert(id);
        }
        if let Some(l) = a.login.as_deref() {
            aliased_login.entry(l).or_default().insert(id);
        }
    }

    let mut uf = UnionFind::new(unaliased.len());
    let mut first_with_key: HashMap<String, usize> = HashMap::new();
    for (i, a) in unaliased.iter().enumerate() {
        let keys = a
            .email_key()
            .map(|e| format!("e\0{e}"))
            .into_iter()
            .chain(a.login.as_ref().map(|l| format!("l\0{l}")));
        for key in keys {
            match first_with_key.get(&key) {
                Some(&j) => uf.union(i, j),
                None => {
                    first_with_key.insert(key, i);
                }
            }
        }
    }
    let mut components: BTreeMap<usize, Vec<&RawActor>> = BTreeMap::new();
    for (i, a) in unaliased.iter().enumerate() {
        components.entry(uf.find(i)).or_default().push(a);
    }

    let mut fresh_bindings = Vec::new();
    for members in components.values() {
        let emails: BTreeSet<String> = members.iter().filter_map(|a| a.email_key()).collect();
        let logins: BTreeSet<&str> = members.iter().filter_map(|a| a.login.as_deref()).collect();
        let via_email = emails
            .iter()
            .filter_map(|e| aliased_email.get(e))
            .flatten()
            .min()
            .copied();
        let via_login = || {
            logins
                .iter()
                .filter_map(|l| aliased_login.get(l))
                .flatten()
                .min()
                .copied()
        };
        let id = match via_email.or_else(via_login) {
            Some(id) => id.to_owned(),
            None => match emails.iter().next() {
                Some(e) => format!("email:{e}"),
                None => format!("login:{}", logins.iter().next().expect("actor has a key")),
            },
        };
        for a in members {
            fresh_bindings.push(((*a).clone(), id.clone()));
        }
    }
    binding.extend(fresh_bindings);

    let contributors: BTreeSet<String> = binding.values().cloned().collect();
    let excluded = binding
        .iter()
        .filter(|(a, id)| aliases.is_excluded(a, id))
        .map(|(_, id)| id.clone())
        .collect();
    Ok(ContributorSet {
        contributors,
        binding,
        excluded,
    })
}

/// Every raw actor that appears in `commits` and `issues`.
pub fn collect_actors(commits: &[CommitRecord], issues: &[IssueRecord]) -> Vec<RawActor> {
    let mut out: BTreeSet<RawActor> = commits.iter().map(RawActor::of_commit).collect();
    for login in issues.iter().flat_map(issue_logins) {
        out.insert(RawActor::tracker(login));
    }
    out.into_iter().collect()
}

fn issue_logins(i: &IssueRecord) -> impl Iterator<Item = &str> {
    std::iter::once(i.opener.as_str())
        .chain(i.closer.as_deref())
        .chain(i.events.iter().filter_map(|e| e.actor.as_deref()))
        .chain(i.comments.iter().map(|c| c.actor.as_str()))
        .filter(|l| !l.trim().is_empty())
}

/// Canonical ids active in the (already window-filtered) inputs, minus excluded ids.
pub fn active_contributors(
    cs: &ContributorSet,
    commits: &[CommitRecord],
    issues: &[IssueRecord],
) -> BTreeSet<String> {
    let from_commits = commits.iter().filter_map(|c| cs.id_of(&RawActor::of_commit(c)));
    let from_issues = issues
        .iter()
        .flat_map(issue_logins)
        .filter_map(|l| cs.id_of_login(l));
    from_commits
        .chain(from_issues)
        .filter(|id| !cs.is_excluded(id))
        .collect()
}

pub fn active_contributor_count(
    cs: &ContributorSet,
    commits: &[CommitRecord],
    issues: &[IssueRecord],
) -> Result<usize, IdentityError> {
    match active_contributors(cs, commits, issues).len() {
        0 => Err(IdentityError::EmptyWindow { project: None }),
        n => Ok(n),
    }
}
