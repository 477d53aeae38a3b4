//! Python module `weipe`.
//!
//! Results cross the boundary as plain dicts and lists, built from the same
//! JSON the HTTP service returns.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use weipe_core::bench::{aggregate as aggregate_reports, run_session as run_core_session, SessionReport};
use weipe_core::model::SocialResultItem;
use weipe_core::parse::{classify_url, extract_blog_profile_bytes, BlogHostPatterns};
use weipe_core::service::identify_body;
use weipe_core::{EngineConfig, FieldMappingRules, FixedClock, SourceId, Threshold};

fn json_loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn json_dumps(obj: &Bound<'_, PyAny>) -> PyResult<String> {
    obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()
}

/// Normalize an e-mail address, raising ValueError when it is not one.
#[pyfunction]
fn normalize_email(address: &str) -> PyResult<String> {
    weipe_core::normalize_email(address)
        .map(|e| e.normalized().to_owned())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Extract name, gender, place and image from one social payload (a dict).
#[pyfunction]
#[pyo3(signature = (payload, provider = "social"))]
fn parse_social_item<'py>(payload: &Bound<'py, PyAny>, provider: &str) -> PyResult<Bound<'py, PyAny>> {
    let value: serde_json::Value = serde_json::from_str(&json_dumps(payload)?)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let serde_json::Value::Object(payload_map) = value else {
        return Err(PyValueError::new_err("payload must be a dict"));
    };
    let item = SocialResultItem {
        source: SourceId::social(provider),
        rank: 1,
        payload: payload_map,
    };
    let q = weipe_core::parse_social_item(&item, &FieldMappingRules::default());
    let gender = match q.gender() {
        weipe_core::Gender::Unspecified => None,
        g => Some(g.as_str()),
    };
    let out = serde_json::json!({
        "name": q.name(),
        "gender": gender,
        "place": q.place(),
        "image": q.image(),
    });
    json_loads(payload.py(), &out.to_string())
}

/// Profile fields of a blog page, or None when the page carries none.
#[pyfunction]
fn extract_blog_profile<'py>(py: Python<'py>, page: &Bound<'py, PyAny>, url: &str) -> PyResult<Option<Bound<'py, PyAny>>> {
    let bytes: Vec<u8> = if let Ok(b) = page.cast::<PyBytes>() {
        b.as_bytes().to_vec()
    } else {
        page.extract::<String>()?.into_bytes()
    };
    extract_blog_profile_bytes(&bytes, url)
        .map(|p| {
            let out = serde_json::json!({
                "url": p.url(),
                "display_name": p.display_name(),
                "location": p.location(),
                "avatar_url": p.avatar_url(),
                "about": p.about(),
            });
            json_loads(py, &out.to_string())
        })
        .transpose()
}

/// Whether a search hit URL is worth fetching as a blog page.
#[pyfunction]
#[pyo3(signature = (url, host_patterns = None))]
fn classify_blog_candidate(url: &str, host_patterns: Option<Vec<String>>) -> bool {
    let patterns = host_patterns.map(BlogHostPatterns::new).unwrap_or_default();
    classify_url(url, &patterns)
}

fn report_tuple(r: &SessionReport) -> (u32, u32, u32, u32) {
    (r.session_id(), r.total_searches(), r.summary_successes(), r.blog_successes())
}

/// The bundled per-session counts as (session, total, summary, blog) tuples.
#[pyfunction]
fn table1() -> Vec<(u32, u32, u32, u32)> {
    weipe_core::bench::table1().iter().map(report_tuple).collect()
}

/// Success rates over (session, total, summary, blog) tuples.
#[pyfunction]
fn aggregate<'py>(py: Python<'py>, reports: Vec<(u32, u32, u32, u32)>) -> PyResult<Bound<'py, PyAny>> {
    let reports = reports
        .into_iter()
        .map(|(s, t, a, b)| SessionReport::new(s, t, a, b))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let agg = aggregate_reports(&reports).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_loads(py, &agg.summary_json())
}

/// Problems found in a fixture corpus, one string each.
#[pyfunction]
fn validate_corpus(path: PathBuf) -> PyResult<Vec<String>> {
    weipe_core::corpus::validate_corpus(&path)
        .map(|v| v.iter().map(ToString::to_string).collect())
        .map_err(|e| PyOSError::new_err(e.to_string()))
}

/// A configured lookup engine.
#[pyclass(frozen)]
struct Engine {
    inner: Arc<weipe_core::Engine>,
    runtime: tokio::runtime::Runtime,
}

#[pymethods]
impl Engine {
    #[new]
    #[pyo3(signature = (config = None, corpus = None, fixed_time = None))]
    fn new(config: Option<PathBuf>, corpus: Option<PathBuf>, fixed_time: Option<&str>) -> PyResult<Self> {
        let cfg = match &config {
            Some(path) => EngineConfig::load(path).map_err(|e| PyOSError::new_err(e.to_string()))?,
            None if corpus.is_some() => EngineConfig::default(),
            None => return Err(PyValueError::new_err("config or corpus is required")),
        };
        let mut engine = weipe_core::Engine::from_config(&cfg, corpus.as_deref())
            .map_err(|e| PyOSError::new_err(e.to_string()))?;
        if let Some(t) = fixed_time {
            let clock = FixedClock::parse(t).map_err(|e| PyValueError::new_err(e.to_string()))?;
            engine = engine.with_clock(Arc::new(clock));
        }
        let runtime = tokio::runtime::Runtime::new().map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(Self {
            inner: Arc::new(engine),
            runtime,
        })
    }

    /// Number of registered providers.
    #[getter]
    fn providers(&self) -> usize {
        self.inner.registry().len()
    }

    /// Look up one address; returns the service response body as a dict.
    #[pyo3(signature = (email, eps = None))]
    fn identify<'py>(&self, py: Python<'py>, email: &str, eps: Option<i64>) -> PyResult<Bound<'py, PyAny>> {
        let email = weipe_core::normalize_email(email).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let eps = eps
            .map(Threshold::new)
            .transpose()
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let body = py
            .detach(|| {
                self.runtime
                    .block_on(self.inner.identify(&email, eps))
                    .map(|identity| identify_body(&identity, false))
            })
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        json_loads(py, &body)
    }

    /// Look up each address in turn; returns (session, total, summary, blog).
    fn run_session(&self, py: Python<'_>, session_id: u32, emails: Vec<String>) -> PyResult<(u32, u32, u32, u32)> {
        let emails = emails
            .iter()
            .map(|e| weipe_core::normalize_email(e))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        py.detach(|| {
            self.runtime
                .block_on(run_core_session(session_id, &emails, self.inner.as_ref()))
        })
        .map(|r| report_tuple(&r))
        .map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

#[pymodule]
fn weipe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normalize_email, m)?)?;
    m.add_function(wrap_pyfunction!(parse_social_item, m)?)?;
    m.add_function(wrap_pyfunction!(extract_blog_profile, m)?)?;
    m.add_function(wrap_pyfunction!(classify_blog_candidate, m)?)?;
    m.add_function(wrap_pyfunction!(table1, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate, m)?)?;
    m.add_function(wrap_pyfunction!(validate_corpus, m)?)?;
    m.add_class::<Engine>()?;
    Ok(())
}
