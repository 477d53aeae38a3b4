use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::{page_path, PAGES_DIR, SOCIAL_DIR, WEB_DIR, WEB_INDEX_FILE};
use crate::model::{absolute_http_url, normalize_email};

/// One problem found in a fixture corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: PathBuf,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.message)
    }
}

struct Report<'a> {
    root: &'a Path,
    violations: Vec<Violation>,
}

impl Report<'_> {
    fn flag(&mut self, path: &Path, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.strip_prefix(self.root).unwrap_or(path).to_path_buf(),
            message: message.into(),
        });
    }
}

fn sorted_entries(dir: &Path) -> io::Result<Vec<std::fs::DirEntry>> {
    let mut entries = std::fs::read_dir(dir)?.collect::<Result<Vec<_>, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

fn is_email_key(key: &str) -> bool {
    normalize_email(key).is_ok_and(|e| e.normalized() == key)
}

fn read_json(report: &mut Report<'_>, path: &Path) -> Option<Value> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            report.flag(path, format!("unreadable: {e}"));
            return None;
        }
    };
    match serde_json::from_slice(&bytes) {
        Ok(v) => Some(v),
        Err(e) => {
            report.flag(path, format!("malformed JSON: {e}"));
            None
        }
    }
}

fn check_social(report: &mut Report<'_>, dir: &Path) -> io::Result<()> {
    for provider in sorted_entries(dir)? {
        let provider_path = provider.path();
        if !provider.file_type()?.is_dir() {
            report.flag(&provider_path, "expected a provider directory");
            continue;
        }
        for file in sorted_entries(&provider_path)? {
            let path = file.path();
            let name = file.file_name().to_string_lossy().into_owned();
            let Some(stem) = name.strip_suffix(".json") else {
                report.flag(&path, "social fixtures must be named <normalized-email>.json");
                continue;
            };
            if !is_email_key(stem) {
                report.flag(&path, format!("{stem:?} is not a normalized e-mail address"));
            }
            match read_json(report, &path) {
                Some(Value::Array(items)) => {
                    if let Some(i) = items.iter().position(|v| !v.is_object()) {
                        report.flag(&path, format!("item {i} is not an object"));
                    }
                }
                Some(_) => report.flag(&path, "root is not an array"),
                None => {}
            }
        }
    }
    Ok(())
}

fn check_web(report: &mut Report<'_>, dir: &Path) -> io::Result<()> {
    for provider in sorted_entries(dir)? {
        let provider_path = provider.path();
        if !provider.file_type()?.is_dir() {
            report.flag(&provider_path, "expected a provider directory");
            continue;
        }
        let index_path = provider_path.join(WEB_INDEX_FILE);
        if !index_path.is_file() {
            report.flag(&index_path, "missing web index");
            continue;
        }
        let Some(index) = read_json(report, &index_path) else {
            continue;
        };
        let Value::Object(index) = index else {
            report.flag(&index_path, "root is not an object");
            continue;
        };
        for (email, hits) in &index {
            if !is_email_key(email) {
                report.flag(&index_path, format!("key {email:?} is not a normalized e-mail address"));
            }
            let Value::Array(hits) = hits else {
                report.flag(&index_path, format!("entry for {email} is not an array"));
                continue;
            };
            for (i, hit) in hits.iter().enumerate() {
                let Some(url) = hit.get("url").and_then(Value::as_str) else {
                    report.flag(&index_path, format!("{email}[{i}] has no url"));
                    continue;
                };
                if absolute_http_url(url).is_none() {
                    report.flag(&index_path, format!("{email}[{i}] url {url:?} is not an absolute http(s) URL"));
                    continue;
                }
                let page = page_path(report.root, url);
                if !page.is_file() {
                    let missing = page.clone();
                    report.flag(&missing, format!("dangling page reference for {url}"));
                }
            }
        }
    }
    Ok(())
}

fn check_pages(report: &mut Report<'_>, dir: &Path) -> io::Result<()> {
    for page in sorted_entries(dir)? {
        let name = page.file_name().to_string_lossy().into_owned();
        let well_named = name
            .strip_suffix(".html")
            .is_some_and(|h| h.len() == 40 && h.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)));
        if !well_named || !page.file_type()?.is_file() {
            report.flag(&page.path(), "pages must be files named <sha1-of-url>.html");
        }
    }
    Ok(())
}

/// Checks file naming, JSON shape and page references of a corpus.
///
/// Fails only when the corpus cannot be walked at all; content problems are
/// returned as violations.
pub fn validate_corpus(root: &Path) -> io::Result<Vec<Violation>> {
    if !root.is_dir() {
        return Err(io::Error::new(
            io::ErrorKind::NotFound,
            format!("{} is not a directory", root.display()),
        ));
    }
    let mut report = Report {
        root,
        violations: Vec::new(),
    };
    for (sub, check) in [
        (SOCIAL_DIR, check_social as fn(&mut Report<'_>, &Path) -> io::Result<()>),
        (WEB_DIR, check_web),
        (PAGES_DIR, check_pages),
    ] {
        let dir = root.join(sub);
        if dir.is_dir() {
            check(&mut report, &dir)?;
        }
    }
    Ok(report.violations)
}
