//! Regenerates the demo corpora under `demo/`.
//!
//! ```text
//! cargo run -p weipe-core --example build_demo -- demo
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;
use weipe_core::bench::table1;
use weipe_core::corpus::{write_table1_replica, CorpusWriter, ReplicaSession, WebIndexEntry};
use weipe_core::normalize_email;

fn write_demo(root: &Path) -> std::io::Result<()> {
    let w = CorpusWriter::new(root)?;
    let social = |provider: &str, email: &str, items: serde_json::Value| {
        let email = normalize_email(email).expect("demo address");
        let items = items.as_array().cloned().unwrap_or_default();
        w.write_social(provider, &email, &items).map(|_| ())
    };
    for p in ["friendbook", "chirper", "linkup"] {
        w.ensure_social_provider(p)?;
    }

    social(
        "friendbook",
        "alice@example.com",
        json!([{
            "name": "Alice Martin",
            "gender": "female",
            "location": "Paris",
            "avatar": "https://img.example.com/alice.jpg"
        }]),
    )?;
    social(
        "chirper",
        "alice@example.com",
        json!([{ "full_name": "alice  martin", "profile": { "city": "Paris" } }]),
    )?;
    social(
        "linkup",
        "alice@example.com",
        json!([{ "display_name": "Alicia Martin", "sex": "F", "place": "Lyon" }]),
    )?;
    social("chirper", "bob@example.org", json!([{ "name": "Bob Stone", "gender": "m" }]))?;
    social("linkup", "dave@example.com", json!([{ "gender": "male", "headline": "Engineer" }]))?;
    social(
        "friendbook",
        "frank@example.com",
        json!([
            { "name": "Frank Ocean", "city": "Chennai" },
            { "name": "Francis Ocean", "city": "Madurai" }
        ]),
    )?;
    social("chirper", "frank@example.com", json!([{ "name": "Frank Ocean", "locality": "Madurai" }]))?;
    social("linkup", "frank@example.com", json!([{ "full_name": "Francis Ocean", "sex": "male" }]))?;

    let pages = [
        (
            "http://alicemartin.blogspot.com/",
            "<html><body><div class=\"h-card\">\
             <img class=\"u-photo\" src=\"/avatar.png\" alt=\"\">\
             <span class=\"p-name\">Alice Martin</span>\
             <span class=\"p-locality\">Paris</span>\
             <p class=\"p-note\">Notes on typography and bicycles.</p>\
             </div></body></html>",
        ),
        (
            "http://news.example.com/2011/cycling-club",
            "<html><body><p>Club results, contact alice@example.com</p></body></html>",
        ),
        (
            "https://bobstone.wordpress.com/about",
            "<html><head><meta name=\"author\" content=\"Bob Stone\">\
             <meta name=\"description\" content=\"Woodworking from Pondicherry\"></head>\
             <body><h1>About</h1></body></html>",
        ),
        (
            "http://carol.livejournal.com/profile",
            "<html><body><div class=\"vcard\"><span class=\"fn\">Carol Wu</span>\
             <span class=\"locality\">Bangalore</span></div></body></html>",
        ),
        (
            "https://forum.example.net/thread/42",
            "<html><body><p>posted by carol@example.net</p></body></html>",
        ),
    ];
    for (url, html) in pages {
        w.write_page(url, html)?;
    }
    let mut index = BTreeMap::new();
    index.insert(
        "alice@example.com".to_owned(),
        vec![
            WebIndexEntry::new(pages[1].0, "Cycling club results", "contact alice@example.com"),
            WebIndexEntry::new(pages[0].0, "Alice Martin", "Notes on typography"),
        ],
    );
    index.insert(
        "bob@example.org".to_owned(),
        vec![WebIndexEntry::new(pages[2].0, "About Bob", "Woodworking")],
    );
    index.insert(
        "carol@example.net".to_owned(),
        vec![
            WebIndexEntry::new(pages[4].0, "Thread 42", "posted by carol@example.net"),
            WebIndexEntry::new(pages[3].0, "Carol's journal", "profile"),
        ],
    );
    w.write_web_index("websearch", &index).map(|_| ())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("demo"));

    write_demo(&out.join("corpus"))?;

    let sessions: Vec<ReplicaSession> = table1()
        .iter()
        .map(|r| ReplicaSession {
            id: r.session_id(),
            total: r.total_searches(),
            summary: r.summary_successes(),
            blog: r.blog_successes(),
        })
        .collect();
    let manifest = write_table1_replica(&out.join("table1").join("corpus"), &sessions)?;
    manifest.save(&out.join("table1").join("manifest.json"))?;
    println!("wrote demo corpora under {}", out.display());
    Ok(())
}
