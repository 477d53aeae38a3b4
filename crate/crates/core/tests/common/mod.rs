//! Oracles shared by the integration tests. They are written against the
//! documented behaviour only and do not call into the code they check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Value;
use weipe_core::model::{FieldResolution, QueriedSource, ResponseStatus};
use weipe_core::{ConsolidatedIdentity, Gender, ProfileQuadruple, SourceId};

pub fn demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

/// Whitespace runs collapse to one space, ends are dropped, letters fold.
fn fold(value: &str) -> String {
    let mut out = String::new();
    let mut pending_space = false;
    for c in value.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.extend(c.to_lowercase());
    }
    out
}

/// What a resolved field should look like, with sources by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expected {
    pub value: String,
    pub sources: Vec<String>,
    pub confidence: Ratio<usize>,
    pub alternatives: Vec<(String, Vec<String>)>,
}

impl Expected {
    pub fn of(resolution: &FieldResolution) -> Self {
        Self {
            value: resolution.value().to_owned(),
            sources: resolution
                .supporting_sources()
                .iter()
                .map(|s| s.provider_name.clone())
                .collect(),
            confidence: resolution.confidence(),
            alternatives: resolution
                .alternatives()
                .iter()
                .map(|a| {
                    (
                        a.value.clone(),
                        a.sources.iter().map(|s| s.provider_name.clone()).collect(),
                    )
                })
                .collect(),
        }
    }
}

/// A vote: (priority, source name, raw value).
pub type Vote = (u32, String, String);

struct OracleGroup {
    key: String,
    /// Distinct supporters as (priority, name), ascending.
    supporters: Vec<(u32, String)>,
    display: String,
}

fn beats(a: &OracleGroup, b: &OracleGroup) -> bool {
    if a.supporters.len() != b.supporters.len() {
        return a.supporters.len() > b.supporters.len();
    }
    for (x, y) in a.supporters.iter().zip(&b.supporters) {
        if x != y {
            return x < y;
        }
    }
    a.key < b.key
}

/// Exhaustive vote count: every candidate value is tallied against every
/// vote, and groups are ranked by how many rivals they beat pairwise.
pub fn oracle_field(votes: &[Vote]) -> Option<Expected> {
    let keys: BTreeSet<String> = votes
        .iter()
        .map(|(_, _, v)| fold(v))
        .filter(|k| !k.is_empty())
        .collect();
    let groups: Vec<OracleGroup> = keys
        .into_iter()
        .map(|key| {
            let mut supporters = Vec::new();
            let mut variants = Vec::new();
            for (p, s, v) in votes {
                if fold(v) == key {
                    if !supporters.contains(&(*p, s.clone())) {
                        supporters.push((*p, s.clone()));
                    }
                    variants.push((*p, s.clone(), v.trim().to_owned()));
                }
            }
            supporters.sort();
            variants.sort();
            OracleGroup {
                key,
                supporters,
                display: variants.remove(0).2,
            }
        })
        .collect();
    let mut ranked: Vec<(usize, &OracleGroup)> = groups
        .iter()
        .map(|g| (groups.iter().filter(|o| beats(g, o)).count(), g))
        .collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0));
    let (wins, winner) = ranked.first()?;
    assert_eq!(*wins, groups.len() - 1, "ranking must be total");
    let names = |g: &OracleGroup| g.supporters.iter().map(|(_, s)| s.clone()).collect::<Vec<_>>();
    let total: usize = groups.iter().map(|g| g.supporters.len()).sum();
    Some(Expected {
        value: winner.display.clone(),
        sources: names(winner),
        confidence: Ratio::new(winner.supporters.len(), total),
        alternatives: ranked[1..]
            .iter()
            .map(|(_, g)| (g.display.clone(), names(g)))
            .collect(),
    })
}

pub fn oracle_gender(votes: &[(u32, String, Gender)]) -> Option<Expected> {
    let side = |want: Gender| {
        let mut v: Vec<(u32, String)> = votes
            .iter()
            .filter(|(_, _, g)| *g == want)
            .map(|(p, s, _)| (*p, s.clone()))
            .collect();
        v.sort();
        v.dedup();
        v.into_iter().map(|(_, s)| s).collect::<Vec<_>>()
    };
    let male = side(Gender::Male);
    let female = side(Gender::Female);
    let (win, win_label, lose, lose_label) = if male.len() > female.len() {
        (male, "male", female, "female")
    } else if female.len() > male.len() {
        (female, "female", male, "male")
    } else {
        return None;
    };
    Some(Expected {
        value: win_label.into(),
        confidence: Ratio::new(win.len(), win.len() + lose.len()),
        sources: win,
        alternatives: if lose.is_empty() {
            vec![]
        } else {
            vec![(lose_label.into(), lose)]
        },
    })
}

/// A random consolidation problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub evidence: Vec<(SourceId, ProfileQuadruple)>,
    pub queried: Vec<QueriedSource>,
}

const NAMES: [[&str; 4]; 3] = [
    ["Alice", "alice", " ALICE ", "Alice"],
    ["Alicia Keys", "alicia  keys", "Alicia\tKeys", "ALICIA KEYS"],
    ["Bob", "bob", "BOB", " Bob"],
];
const PLACES: [[&str; 4]; 3] = [
    ["Paris", "paris", "PARIS ", "Paris"],
    ["New York", "new york", "New  York", "NEW YORK"],
    ["Lyon", "lyon", " Lyon", "LYON"],
];
const IMAGES: [[&str; 4]; 3] = [
    ["http://img.test/a.png", "HTTP://IMG.TEST/A.PNG", "http://img.test/a.png ", "http://IMG.test/a.png"],
    ["https://cdn.test/b.jpg", "https://CDN.test/b.jpg", "https://cdn.test/b.jpg", "HTTPS://cdn.test/B.jpg"],
    ["http://img.test/c.gif", "http://img.test/C.gif", "http://img.test/c.gif", "http://Img.Test/c.gif"],
];

fn pick<'a>(rng: &mut impl Rng, pool: &'a [[&'a str; 4]; 3], distinct: usize) -> Option<&'a str> {
    if rng.random_bool(0.2) {
        return None;
    }
    let group = &pool[rng.random_range(0..distinct)];
    Some(group[rng.random_range(0..4)])
}

pub fn random_instance(rng: &mut impl Rng) -> Instance {
    let n = rng.random_range(1..=4usize);
    let mut priorities: Vec<u32> = (1..=20).collect();
    priorities.shuffle(rng);
    let distinct = [
        rng.random_range(1..=3usize),
        rng.random_range(1..=3usize),
        rng.random_range(1..=3usize),
    ];
    let mut evidence = Vec::new();
    let mut queried = Vec::new();
    for i in 0..n {
        let id = SourceId::social(format!("src{i}"));
        queried.push(QueriedSource {
            source: id.clone(),
            priority: priorities[i],
            status: ResponseStatus::Ok,
            latency_ms: 0,
        });
        for _ in 0..rng.random_range(1..=2) {
            let gender = [Gender::Male, Gender::Female, Gender::Unspecified][rng.random_range(0..3)];
            evidence.push((
                id.clone(),
                ProfileQuadruple::new(
                    pick(rng, &NAMES, distinct[0]),
                    gender,
                    pick(rng, &PLACES, distinct[1]),
                    pick(rng, &IMAGES, distinct[2]),
                ),
            ));
        }
    }
    evidence.shuffle(rng);
    Instance { evidence, queried }
}

/// Compares `identity` with the oracle; returns a description of the first
/// mismatch.
pub fn check_against_oracle(instance: &Instance, identity: &ConsolidatedIdentity) -> Result<(), String> {
    let priority = |s: &SourceId| {
        instance
            .queried
            .iter()
            .find(|q| &q.source == s)
            .map(|q| q.priority)
            .unwrap()
    };
    let votes = |get: fn(&ProfileQuadruple) -> Option<&str>| -> Vec<Vote> {
        instance
            .evidence
            .iter()
            .filter_map(|(s, q)| get(q).map(|v| (priority(s), s.provider_name.clone(), v.to_owned())))
            .collect()
    };
    let genders: Vec<(u32, String, Gender)> = instance
        .evidence
        .iter()
        .map(|(s, q)| (priority(s), s.provider_name.clone(), q.gender()))
        .collect();
    let fields = [
        ("name", oracle_field(&votes(ProfileQuadruple::name)), identity.name()),
        ("place", oracle_field(&votes(ProfileQuadruple::place)), identity.place()),
        ("image", oracle_field(&votes(ProfileQuadruple::image)), identity.image()),
        ("gender", oracle_gender(&genders), identity.gender()),
    ];
    for (field, want, got) in fields {
        let got = got.map(Expected::of);
        if want != got {
            return Err(format!("{field}: oracle {want:?}, engine {got:?}"));
        }
    }
    Ok(())
}

/// Reference count of lookups with name evidence and with blog profiles,
/// read straight from the corpus files.
pub fn count_from_files(corpus: &Path, emails: &[&str]) -> (u32, u32) {
    const NAME_KEYS: [&str; 3] = ["name", "full_name", "display_name"];
    const BLOG_HOSTS: [&str; 4] = ["blog", "blogspot.", "wordpress.", "livejournal."];
    const MARKERS: [&str; 9] = [
        "class=\"p-name\"",
        "class=\"fn\"",
        "class=\"p-locality\"",
        "class=\"locality\"",
        "class=\"u-photo\"",
        "class=\"note\"",
        "class=\"p-note\"",
        "name=\"author\"",
        "name=\"description\"",
    ];
    let has_name = |v: &Value| {
        let named = |o: &serde_json::Map<String, Value>| {
            NAME_KEYS.iter().any(|k| {
                o.get(*k)
                    .and_then(Value::as_str)
                    .is_some_and(|s| !s.trim().is_empty())
            })
        };
        v.as_object().is_some_and(|o| {
            named(o) || o.values().any(|inner| inner.as_object().is_some_and(named))
        })
    };
    let social_root = corpus.join("social");
    let web_root = corpus.join("web");
    let providers = |dir: &Path| -> Vec<PathBuf> {
        let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
            .map(|rd| rd.filter_map(|e| e.ok()).map(|e| e.path()).collect())
            .unwrap_or_default();
        v.sort();
        v
    };
    let indexes: Vec<BTreeMap<String, Vec<Value>>> = providers(&web_root)
        .iter()
        .filter_map(|p| std::fs::read_to_string(p.join("index.json")).ok())
        .map(|t| serde_json::from_str(&t).unwrap())
        .collect();

    let mut summary = 0;
    let mut blog = 0;
    for email in emails {
        let named = providers(&social_root).iter().any(|p| {
            std::fs::read_to_string(p.join(format!("{email}.json")))
                .ok()
                .and_then(|t| serde_json::from_str::<Value>(&t).ok())
                .and_then(|v| v.as_array().cloned())
                .is_some_and(|items| items.iter().any(has_name))
        });
        let blogged = indexes.iter().flat_map(|i| i.get(*email)).flatten().any(|hit| {
            let url = hit["url"].as_str().unwrap_or_default();
            let rest = url.split_once("://").map(|x| x.1).unwrap_or_default();
            let (host, path) = rest.split_at(rest.find('/').unwrap_or(rest.len()));
            let candidate = BLOG_HOSTS.iter().any(|h| host.contains(h)) || path.contains("/profile");
            candidate
                && std::fs::read_to_string(weipe_core::corpus::page_path(corpus, url))
                    .is_ok_and(|html| MARKERS.iter().any(|m| html.contains(m)))
        });
        summary += u32::from(named);
        blog += u32::from(blogged);
    }
    (summary, blog)
}

/// In-memory backend that counts calls and can stall or fail.
#[derive(Default)]
pub struct StubBackend {
    pub social: Vec<Value>,
    pub web: Vec<weipe_core::provider::RawWebHit>,
    pub pages: BTreeMap<String, String>,
    pub delay_ms: u64,
    pub fail: bool,
    pub calls: std::sync::atomic::AtomicUsize,
}

impl StubBackend {
    pub fn calls(&self) -> usize {
        self.calls.load(std::sync::atomic::Ordering::SeqCst)
    }

    async fn enter(&self) -> Result<(), weipe_core::provider::BackendError> {
        self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        if self.delay_ms > 0 {
            tokio::time::sleep(std::time::Duration::from_millis(self.delay_ms)).await;
        }
        if self.fail {
            return Err(weipe_core::provider::BackendError::Other("down".into()));
        }
        Ok(())
    }
}

#[async_trait::async_trait]
impl weipe_core::provider::Backend for StubBackend {
    async fn social(
        &self,
        _email: &weipe_core::EmailId,
        _limit: usize,
    ) -> Result<Vec<Value>, weipe_core::provider::BackendError> {
        self.enter().await?;
        Ok(self.social.clone())
    }

    async fn web(
        &self,
        _query: &weipe_core::provider::WebQuery,
        _limit: usize,
    ) -> Result<Vec<weipe_core::provider::RawWebHit>, weipe_core::provider::BackendError> {
        self.enter().await?;
        Ok(self.web.clone())
    }

    async fn page(&self, url: &str) -> Result<Option<String>, weipe_core::provider::BackendError> {
        Ok(self.pages.get(url).cloned())
    }
}

/// A clock the test moves by hand.
pub struct ManualClock(pub std::sync::Mutex<chrono::DateTime<chrono::Utc>>);

impl ManualClock {
    pub fn at(rfc3339: &str) -> Self {
        Self(std::sync::Mutex::new(rfc3339.parse().unwrap()))
    }

    pub fn advance_s(&self, seconds: i64) {
        *self.0.lock().unwrap() += chrono::Duration::seconds(seconds);
    }
}

impl weipe_core::Clock for ManualClock {
    fn now(&self) -> chrono::DateTime<chrono::Utc> {
        *self.0.lock().unwrap()
    }

    fn monotonic_ms(&self) -> u64 {
        0
    }
}
