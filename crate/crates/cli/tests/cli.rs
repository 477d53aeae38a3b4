use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::sync::Arc;

use serde_json::Value;
use weipe_core::corpus::{page_file_name, CorpusWriter, WebIndexEntry};
use weipe_core::service::read_log;
use weipe_core::{normalize_email, Engine, EngineConfig, FixedClock, Service, ServiceConfig};

const T0: &str = "2011-05-01T10:00:00Z";

fn demo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

fn weipe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weipe"))
        .args(args)
        .output()
        .expect("run weipe")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn demo_config() -> String {
    demo().join("weipe.json").display().to_string()
}

#[test]
fn identify_json_matches_the_service_body() {
    let out = weipe(&["identify", "alice@example.com", "--config", &demo_config(), "--json", "--fixed-time", T0]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    let body: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(body["summary_success"], true);

    let config = EngineConfig::load(&demo().join("weipe.json")).unwrap();
    let engine = Engine::from_config(&config, None)
        .unwrap()
        .with_clock(Arc::new(FixedClock::parse(T0).unwrap()));
    let service = Service::new(Arc::new(engine), ServiceConfig::default()).unwrap();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let r = rt.block_on(service.identify(Some("alice@example.com"), None));
    assert_eq!(stdout, format!("{}\n", r.body));
}

#[test]
fn identify_text_report_has_both_sections() {
    let out = weipe(&["identify", "Alice@Example.com", "--config", &demo_config()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = text(&out.stdout);
    let summary = stdout.find("Summary Information").unwrap();
    let blogs = stdout.find("Blog Profiles").unwrap();
    assert!(summary < blogs);
    assert!(stdout.contains("Alice Martin  [0.67; friendbook, chirper]"));
    assert!(stdout.contains("http://alicemartin.blogspot.com/"));
}

#[test]
fn identify_exit_codes() {
    let out = weipe(&["identify", "not-an-email", "--config", &demo_config()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("invalid_email"));

    let out = weipe(&["identify", "a@b.org", "--eps", "0", "--config", &demo_config()]);
    assert_eq!(out.status.code(), Some(2));

    let empty = tempfile::tempdir().unwrap();
    let out = weipe(&["identify", "ghost@nowhere.test", "--corpus", empty.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(text(&out.stdout).contains("no information found"));

    let out = weipe(&["identify", "erin@example.com", "--config", &demo_config()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(text(&out.stdout).contains("no information found"));

    let out = weipe(&["identify", "a@b.org", "--config", "/nonexistent/weipe.json"]);
    assert_eq!(out.status.code(), Some(4));
    let out = weipe(&["identify", "a@b.org"]);
    assert_eq!(out.status.code(), Some(4));
}

struct Server {
    child: Child,
    base: String,
}

impl Server {
    fn start(extra: &[&str]) -> Self {
        let mut child = Command::new(env!("CARGO_BIN_EXE_weipe"))
            .args(["serve", "--port", "0", "--config", &demo_config()])
            .args(extra)
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let base = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
            .to_owned();
        Self { child, base }
    }

    fn interrupt(mut self) -> Option<i32> {
        Command::new("kill")
            .args(["-INT", &self.child.id().to_string()])
            .status()
            .unwrap();
        self.child.wait().unwrap().code()
    }
}

#[test]
fn serve_answers_and_shuts_down_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("search.jsonl");
    let server = Server::start(&["--log", log.to_str().unwrap()]);
    let health = reqwest::blocking::get(format!("{}/api/v1/health", server.base)).unwrap();
    assert_eq!(health.status(), 200);
    assert_eq!(health.json::<Value>().unwrap()["status"], "ok");
    for email in ["alice@example.com", "bob@example.org", "alice@example.com"] {
        let r = reqwest::blocking::get(format!("{}/api/v1/identify?email={email}", server.base)).unwrap();
        assert_eq!(r.status(), 200);
    }
    assert_eq!(server.interrupt(), Some(0));
    let readout = read_log(&log).unwrap();
    assert_eq!(readout.entries.len(), 3);
    assert!(readout.skipped_lines.is_empty());
}

#[test]
fn serve_reports_a_taken_port() {
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let out = weipe(&["serve", "--port", &port, "--config", &demo_config()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(text(&out.stderr).contains("cannot listen"));
}

#[test]
fn bench_reproduces_the_recorded_table() {
    let out_dir = tempfile::tempdir().unwrap();
    let table1 = demo().join("table1");
    let out = weipe(&[
        "bench",
        "--manifest",
        table1.join("manifest.json").to_str().unwrap(),
        "--corpus",
        table1.join("corpus").to_str().unwrap(),
        "--out",
        out_dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.path().join("results.csv")).unwrap();
    assert_eq!(csv, weipe_core::bench::TABLE1_CSV);
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["summary_rate"]["fraction"], "139/200");
    assert_eq!(summary["blog_rate"]["fraction"], "104/200");
}

#[test]
fn bench_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = demo().join("corpus");
    let corpus = corpus.to_str().unwrap();
    let out_dir = dir.path().join("out");
    let out_dir = out_dir.to_str().unwrap();

    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, r#"{"sessions": []}"#).unwrap();
    let out = weipe(&["bench", "--manifest", empty.to_str().unwrap(), "--corpus", corpus, "--out", out_dir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("no sessions"));

    let out = weipe(&["bench", "--manifest", "/nonexistent.json", "--corpus", corpus, "--out", out_dir]);
    assert_eq!(out.status.code(), Some(4));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let unwritable = blocker.join("out");
    let manifest = demo().join("manifest.json");
    let out = weipe(&[
        "bench",
        "--manifest",
        manifest.to_str().unwrap(),
        "--corpus",
        corpus,
        "--out",
        unwritable.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn fixtures_validate() {
    let out = weipe(&["fixtures", "validate", "--corpus", demo().join("corpus").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    let out = weipe(&["fixtures", "validate", "--corpus", demo().join("table1/corpus").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));

    let dir = tempfile::tempdir().unwrap();
    let w = CorpusWriter::new(dir.path()).unwrap();
    let url = "http://gone.blogspot.com/";
    let mut index = std::collections::BTreeMap::new();
    index.insert("a@b.org".to_owned(), vec![WebIndexEntry::new(url, "", "")]);
    w.write_web_index("web", &index).unwrap();
    let out = weipe(&["fixtures", "validate", "--corpus", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
    assert!(text(&out.stdout).contains(&page_file_name(url)));

    w.write_page(url, "<p>").unwrap();
    w.write_social("fb", &normalize_email("a@b.org").unwrap(), &[]).unwrap();
    std::fs::write(dir.path().join("social/fb/a@b.org.json"), "{}").unwrap();
    let out = weipe(&["fixtures", "validate", "--corpus", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
    assert!(text(&out.stdout).contains("root is not an array"));

    let out = weipe(&["fixtures", "validate", "--corpus", "/nonexistent"]);
    assert_eq!(out.status.code(), Some(4));
}
