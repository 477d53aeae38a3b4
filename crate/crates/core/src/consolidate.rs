//! Merges per-source quadruples into one identity.
//!
//! Each field is decided by vote. Values are grouped by their normalized form
//! (trimmed, inner whitespace collapsed, case-folded) and every distinct
//! source counts once per group. The largest group wins; ties go to the
//! group whose sources, taken in priority order, rank higher (lowest
//! priority number first), and finally to the smaller normalized value.
//! The displayed text is the variant reported by the group's best source.
//!
//! Gender is a straight majority between `male` and `female`; unspecified
//! abstains and a tie leaves the field empty.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::{DateTime, Utc};

use crate::model::{
    Alternative, BlogProfile, ConsolidatedIdentity, EmailId, FieldResolution, Gender,
    ProfileQuadruple, QueriedSource, ResolvedFields, SourceId,
};

/// Comparison form of a field value.
pub fn normalize_value(value: &str) -> String {
    value
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Orders sources by priority; unknown sources sort last, by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Ranked {
    priority: u32,
    source: SourceId,
}

struct Group {
    sources: BTreeSet<Ranked>,
    variants: BTreeSet<(Ranked, String)>,
}

impl Group {
    fn display(&self) -> String {
        self.variants
            .first()
            .map(|(_, v)| v.clone())
            .unwrap_or_default()
    }

    fn sources(&self) -> Vec<SourceId> {
        self.sources.iter().map(|r| r.source.clone()).collect()
    }
}

/// Picks the winning group among votes `(source, value)`.
fn resolve<'a>(
    votes: impl IntoIterator<Item = (&'a SourceId, &'a str)>,
    priority: &dyn Fn(&SourceId) -> u32,
) -> Option<FieldResolution> {
    let mut groups: BTreeMap<String, Group> = BTreeMap::new();
    for (source, value) in votes {
        let key = normalize_value(value);
        if key.is_empty() {
            continue;
        }
        let ranked = Ranked {
            priority: priority(source),
            source: source.clone(),
        };
        let group = groups.entry(key).or_insert_with(|| Group {
            sources: BTreeSet::new(),
            variants: BTreeSet::new(),
        });
        group.sources.insert(ranked.clone());
        group.variants.insert((ranked, value.trim().to_owned()));
    }
    let mut ordered: Vec<(String, Group)> = groups.into_iter().collect();
    // Best first: more sources, then better-ranked source list, then key.
    ordered.sort_by(|(ka, a), (kb, b)| {
        b.sources
            .len()
            .cmp(&a.sources.len())
            .then_with(|| a.sources.iter().cmp(b.sources.iter()))
            .then_with(|| ka.cmp(kb))
    });
    let mut ordered = ordered.into_iter();
    let (_, winner) = ordered.next()?;
    let alternatives = ordered
        .map(|(_, g)| Alternative {
            value: g.display(),
            sources: g.sources(),
        })
        .collect();
    Some(FieldResolution::new(winner.display(), winner.sources(), alternatives))
}

fn resolve_gender(
    votes: impl IntoIterator<Item = (SourceId, Gender)>,
    priority: &dyn Fn(&SourceId) -> u32,
) -> Option<FieldResolution> {
    let mut male = BTreeSet::new();
    let mut female = BTreeSet::new();
    for (source, gender) in votes {
        let ranked = Ranked {
            priority: priority(&source),
            source,
        };
        match gender {
            Gender::Male => male.insert(ranked),
            Gender::Female => female.insert(ranked),
            Gender::Unspecified => false,
        };
    }
    let strip = |set: BTreeSet<Ranked>| set.into_iter().map(|r| r.source).collect::<Vec<_>>();
    let (winner, label, loser, loser_label) = match male.len().cmp(&female.len()) {
        std::cmp::Ordering::Greater => (male, Gender::Male, female, Gender::Female),
        std::cmp::Ordering::Less => (female, Gender::Female, male, Gender::Male),
        std::cmp::Ordering::Equal => return None,
    };
    let alternatives = if loser.is_empty() {
        Vec::new()
    } else {
        vec![Alternative {
            value: loser_label.as_str().to_owned(),
            sources: strip(loser),
        }]
    };
    Some(FieldResolution::new(
        label.as_str().to_owned(),
        strip(winner),
        alternatives,
    ))
}

/// Builds the consolidated identity for `email`.
///
/// Priorities come from `sources_queried`. Blog profiles are kept in input
/// order with later duplicates of a URL dropped.
pub fn consolidate(
    email: EmailId,
    evidence: &[(SourceId, ProfileQuadruple)],
    blogs: Vec<BlogProfile>,
    sources_queried: Vec<QueriedSource>,
    now: DateTime<Utc>,
) -> ConsolidatedIdentity {
    let priorities: HashMap<&SourceId, u32> = sources_queried
        .iter()
        .map(|q| (&q.source, q.priority))
        .collect();
    let priority = |s: &SourceId| priorities.get(s).copied().unwrap_or(u32::MAX);

    let field = |get: fn(&ProfileQuadruple) -> Option<&str>| {
        resolve(
            evidence.iter().filter_map(|(s, q)| get(q).map(|v| (s, v))),
            &priority,
        )
    };
    let fields = ResolvedFields {
        name: field(ProfileQuadruple::name),
        place: field(ProfileQuadruple::place),
        image: field(ProfileQuadruple::image),
        gender: resolve_gender(
            evidence.iter().map(|(s, q)| (s.clone(), q.gender())),
            &priority,
        ),
    };

    let mut seen = HashSet::new();
    let blogs = blogs
        .into_iter()
        .filter(|b| seen.insert(b.url().to_owned()))
        .collect();

    ConsolidatedIdentity::new(email, fields, blogs, sources_queried, now)
}
