//! Search-session benchmarking: per-session success counts, aggregate rates
//! and chart-ready CSV.

use std::collections::HashSet;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::IdentifyHandle;
use crate::model::{normalize_email, EmailId, InvalidEmail};
use crate::service::LogEntry;

/// Recorded per-session counts of the reference evaluation (ten sessions of
/// twenty searches each).
pub const TABLE1_CSV: &str = include_str!("../data/table1.csv");

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("engine unavailable: {0}")]
    EngineUnavailable(String),
    #[error("session has no e-mails")]
    EmptySession,
    #[error("duplicate e-mail {0} in session")]
    DuplicateEmail(String),
    #[error("no session reports to aggregate")]
    NoReports,
    #[error("manifest has no sessions")]
    NoSessions,
    #[error("invalid report: {0}")]
    InvalidReport(String),
    #[error("session {session}: {source}")]
    InvalidEmail {
        session: u32,
        #[source]
        source: InvalidEmail,
    },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

/// Success counts for one session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawReport")]
pub struct SessionReport {
    session_id: u32,
    total_searches: u32,
    summary_successes: u32,
    blog_successes: u32,
}

#[derive(Deserialize)]
struct RawReport {
    session_id: u32,
    total_searches: u32,
    summary_successes: u32,
    blog_successes: u32,
}

impl TryFrom<RawReport> for SessionReport {
    type Error = BenchError;

    fn try_from(r: RawReport) -> Result<Self, Self::Error> {
        SessionReport::new(r.session_id, r.total_searches, r.summary_successes, r.blog_successes)
    }
}

impl SessionReport {
    pub fn new(
        session_id: u32,
        total_searches: u32,
        summary_successes: u32,
        blog_successes: u32,
    ) -> Result<Self, BenchError> {
        if session_id == 0 || total_searches == 0 {
            return Err(BenchError::InvalidReport(format!(
                "session {session_id}: id and total must be positive"
            )));
        }
        if summary_successes > total_searches || blog_successes > total_searches {
            return Err(BenchError::InvalidReport(format!(
                "session {session_id}: successes exceed {total_searches} searches"
            )));
        }
        Ok(Self {
            session_id,
            total_searches,
            summary_successes,
            blog_successes,
        })
    }

    pub fn session_id(&self) -> u32 {
        self.session_id
    }

    pub fn total_searches(&self) -> u32 {
        self.total_searches
    }

    pub fn summary_successes(&self) -> u32 {
        self.summary_successes
    }

    pub fn blog_successes(&self) -> u32 {
        self.blog_successes
    }

    /// Counts a session from search-log records.
    pub fn from_log(session_id: u32, entries: &[LogEntry]) -> Result<Self, BenchError> {
        let count = |f: fn(&LogEntry) -> bool| entries.iter().filter(|e| f(e)).count() as u32;
        Self::new(
            session_id,
            entries.len() as u32,
            count(|e| e.summary_success),
            count(|e| e.blog_success),
        )
    }
}

/// Parses `session,total,summary,blog` CSV (header required).
pub fn parse_reports_csv(text: &str) -> Result<Vec<SessionReport>, BenchError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "session,total,summary,blog" => {}
        other => {
            return Err(BenchError::InvalidReport(format!("unexpected header {other:?}")));
        }
    }
    lines
        .map(|line| {
            let cols: Vec<u32> = line
                .split(',')
                .map(|c| c.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|e| BenchError::InvalidReport(format!("{line:?}: {e}")))?;
            match cols[..] {
                [id, total, summary, blog] => SessionReport::new(id, total, summary, blog),
                _ => Err(BenchError::InvalidReport(format!("{line:?}: expected 4 columns"))),
            }
        })
        .collect()
}

/// The reference dataset as session reports.
pub fn table1() -> Vec<SessionReport> {
    parse_reports_csv(TABLE1_CSV).expect("bundled table is well formed")
}

/// Summed success rates over a set of sessions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregate {
    pub summary_rate: Ratio<u64>,
    pub blog_rate: Ratio<u64>,
    pub per_session: Vec<SessionReport>,
}

pub fn aggregate(reports: &[SessionReport]) -> Result<Aggregate, BenchError> {
    if reports.is_empty() {
        return Err(BenchError::NoReports);
    }
    let sum = |f: fn(&SessionReport) -> u32| reports.iter().map(|r| u64::from(f(r))).sum::<u64>();
    let total = sum(SessionReport::total_searches);
    Ok(Aggregate {
        summary_rate: Ratio::new(sum(SessionReport::summary_successes), total),
        blog_rate: Ratio::new(sum(SessionReport::blog_successes), total),
        per_session: reports.to_vec(),
    })
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Serialize)]
struct RateJson {
    value: f64,
    fraction: String,
}

#[derive(Serialize)]
struct SummaryJson {
    sessions: usize,
    total_searches: u64,
    summary_rate: RateJson,
    blog_rate: RateJson,
}

impl Aggregate {
    pub fn summary_rate_f64(&self) -> f64 {
        ratio_f64(self.summary_rate)
    }

    pub fn blog_rate_f64(&self) -> f64 {
        ratio_f64(self.blog_rate)
    }

    /// `session,total,summary,blog`, one row per session.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("session,total,summary,blog\n");
        for r in &self.per_session {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.session_id, r.total_searches, r.summary_successes, r.blog_successes
            ));
        }
        out
    }

    pub fn summary_json(&self) -> String {
        // Unreduced fraction: successes over searches.
        let total: u64 = self.per_session.iter().map(|r| u64::from(r.total_searches)).sum();
        let frac = |f: fn(&SessionReport) -> u32| {
            let n: u64 = self.per_session.iter().map(|r| u64::from(f(r))).sum();
            format!("{n}/{total}")
        };
        let body = SummaryJson {
            sessions: self.per_session.len(),
            total_searches: total,
            summary_rate: RateJson {
                value: self.summary_rate_f64(),
                fraction: frac(SessionReport::summary_successes),
            },
            blog_rate: RateJson {
                value: self.blog_rate_f64(),
                fraction: frac(SessionReport::blog_successes),
            },
        };
        serde_json::to_string_pretty(&body).expect("summary serializes")
    }
}

/// Runs every address through `engine`, one after another.
///
/// A lookup where every provider failed counts as an unsuccessful search.
pub async fn run_session(
    session_id: u32,
    emails: &[EmailId],
    engine: &dyn IdentifyHandle,
) -> Result<SessionReport, BenchError> {
    if emails.is_empty() {
        return Err(BenchError::EmptySession);
    }
    let mut seen = HashSet::new();
    if let Some(dup) = emails.iter().find(|e| !seen.insert(*e)) {
        return Err(BenchError::DuplicateEmail(dup.normalized().to_owned()));
    }
    let (mut summary, mut blog) = (0, 0);
    for email in emails {
        let identity = engine
            .identify(email)
            .await
            .map_err(|e| BenchError::EngineUnavailable(e.to_string()))?;
        summary += u32::from(identity.summary_success());
        blog += u32::from(identity.blog_success());
    }
    SessionReport::new(session_id, emails.len() as u32, summary, blog)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestSession {
    pub id: u32,
    pub emails: Vec<String>,
}

/// Which addresses each session searches.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SessionManifest {
    pub sessions: Vec<ManifestSession>,
}

impl SessionManifest {
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), BenchError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Validated addresses per session.
    pub fn resolve(&self) -> Result<Vec<(u32, Vec<EmailId>)>, BenchError> {
        if self.sessions.is_empty() {
            return Err(BenchError::NoSessions);
        }
        self.sessions
            .iter()
            .map(|s| {
                let emails = s
                    .emails
                    .iter()
                    .map(|e| normalize_email(e))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|source| BenchError::InvalidEmail { session: s.id, source })?;
                Ok((s.id, emails))
            })
            .collect()
    }
}

/// Runs every session of a manifest.
pub async fn run_manifest(
    manifest: &SessionManifest,
    engine: &dyn IdentifyHandle,
) -> Result<Vec<SessionReport>, BenchError> {
    let mut reports = Vec::new();
    for (id, emails) in manifest.resolve()? {
        reports.push(run_session(id, &emails, engine).await?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table1_rates_are_exact() {
        let agg = aggregate(&table1()).unwrap();
        assert_eq!(agg.summary_rate, Ratio::new(139, 200));
        assert_eq!(agg.blog_rate, Ratio::new(104, 200));
        assert_eq!(agg.summary_rate_f64(), 0.695);
        assert_eq!(agg.blog_rate_f64(), 0.52);
        assert_eq!(agg.to_csv(), TABLE1_CSV);
    }

    #[test]
    fn degenerate_sessions() {
        let full = aggregate(&[SessionReport::new(1, 20, 20, 20).unwrap()]).unwrap();
        assert_eq!((full.summary_rate, full.blog_rate), (Ratio::from_integer(1), Ratio::from_integer(1)));
        let none = aggregate(&[SessionReport::new(1, 20, 0, 0).unwrap()]).unwrap();
        assert_eq!((none.summary_rate, none.blog_rate), (Ratio::from_integer(0), Ratio::from_integer(0)));
        assert!(matches!(aggregate(&[]), Err(BenchError::NoReports)));
    }

    #[test]
    fn report_invariants() {
        assert!(SessionReport::new(1, 20, 21, 0).is_err());
        assert!(SessionReport::new(1, 20, 0, 21).is_err());
        assert!(SessionReport::new(0, 20, 0, 0).is_err());
        assert!(SessionReport::new(1, 0, 0, 0).is_err());
        assert!(serde_json::from_str::<SessionReport>(
            r#"{"session_id":1,"total_searches":2,"summary_successes":3,"blog_successes":0}"#
        )
        .is_err());
    }

    #[test]
    fn summary_json_carries_both_rates() {
        let json: serde_json::Value =
            serde_json::from_str(&aggregate(&table1()).unwrap().summary_json()).unwrap();
        assert_eq!(json["summary_rate"]["fraction"], "139/200");
        assert_eq!(json["blog_rate"]["fraction"], "104/200");
        assert_eq!(json["summary_rate"]["value"], 0.695);
        assert_eq!(json["total_searches"], 200);
    }

    #[test]
    fn manifest_validation() {
        assert!(matches!(SessionManifest::default().resolve(), Err(BenchError::NoSessions)));
        let m = SessionManifest {
            sessions: vec![ManifestSession { id: 1, emails: vec!["nope".into()] }],
        };
        assert!(matches!(m.resolve(), Err(BenchError::InvalidEmail { session: 1, .. })));
    }

    fn report() -> impl Strategy<Value = SessionReport> {
        (1u32..50, 1u32..40)
            .prop_flat_map(|(id, total)| (Just(id), Just(total), 0..=total, 0..=total))
            .prop_map(|(id, t, s, b)| SessionReport::new(id, t, s, b).unwrap())
    }

    proptest! {
        #[test]
        fn rates_bounded_and_order_free(mut reports in prop::collection::vec(report(), 1..12)) {
            let a = aggregate(&reports).unwrap();
            prop_assert!(a.summary_rate <= Ratio::from_integer(1));
            prop_assert!(a.blog_rate <= Ratio::from_integer(1));
            reports.reverse();
            let b = aggregate(&reports).unwrap();
            prop_assert_eq!((a.summary_rate, a.blog_rate), (b.summary_rate, b.blog_rate));
        }
    }
}
