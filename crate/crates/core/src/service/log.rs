//! Append-only JSON-lines search log.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::model::{ConsolidatedIdentity, ResponseStatus, SourceKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderStatus {
    pub provider: String,
    pub kind: SourceKind,
    pub status: ResponseStatus,
}

/// One identify call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub timestamp: DateTime<Utc>,
    pub normalized_email: String,
    pub summary_success: bool,
    pub blog_success: bool,
    pub provider_statuses: Vec<ProviderStatus>,
}

impl LogEntry {
    pub fn from_identity(identity: &ConsolidatedIdentity, timestamp: DateTime<Utc>) -> Self {
        Self {
            timestamp,
            normalized_email: identity.email().normalized().to_owned(),
            summary_success: identity.summary_success(),
            blog_success: identity.blog_success(),
            provider_statuses: identity
                .sources_queried()
                .iter()
                .map(|s| ProviderStatus {
                    provider: s.source.provider_name.clone(),
                    kind: s.source.kind,
                    status: s.status,
                })
                .collect(),
        }
    }
}

/// Serializes appends to one log file.
#[derive(Debug)]
pub struct SessionLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl SessionLog {
    pub fn open(path: impl Into<PathBuf>) -> io::Result<Self> {
        let path = path.into();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(&path)?;
        if ends_mid_line(&mut file)? {
            file.write_all(b"\n")?;
        }
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes the entry as one line in a single `write_all`.
    pub fn append(&self, entry: &LogEntry) -> io::Result<()> {
        let mut line = serde_json::to_vec(entry).map_err(io::Error::other)?;
        line.push(b'\n');
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(&line)
    }

    pub fn sync(&self) -> io::Result<()> {
        self.file
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .sync_data()
    }
}

/// True when a previous writer died before finishing its last line.
fn ends_mid_line(file: &mut File) -> io::Result<bool> {
    use std::io::{Read, Seek, SeekFrom};
    if file.metadata()?.len() == 0 {
        return Ok(false);
    }
    file.seek(SeekFrom::End(-1))?;
    let mut last = [0u8; 1];
    file.read_exact(&mut last)?;
    Ok(last[0] != b'\n')
}

/// Entries read back from a log, with the line numbers that did not parse.
#[derive(Debug, Default)]
pub struct LogReadout {
    pub entries: Vec<LogEntry>,
    pub skipped_lines: Vec<usize>,
}

/// Reads a log, skipping (with a warning) lines that do not parse, such as a
/// final line cut short by a crash.
pub fn read_log(path: &Path) -> io::Result<LogReadout> {
    let mut out = LogReadout::default();
    for (i, line) in BufReader::new(File::open(path)?).split(b'\n').enumerate() {
        let line = line?;
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        match serde_json::from_slice::<LogEntry>(&line) {
            Ok(entry) => out.entries.push(entry),
            Err(e) => {
                tracing::warn!(path = %path.display(), line = i + 1, error = %e, "skipping unreadable log line");
                out.skipped_lines.push(i + 1);
            }
        }
    }
    Ok(out)
}
