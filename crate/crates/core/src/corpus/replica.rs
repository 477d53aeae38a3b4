//! Synthetic corpus whose sessions reproduce chosen success counts.
//!
//! In a session with `summary` name-bearing and `blog` blog-bearing
//! addresses, address `i` gets a named social record when `i < summary` and
//! a blog hit with a profile page when `i < blog`. Near-misses are mixed in
//! right after each cut-off: a social record without a name, a blog page
//! without profile markup, and a profile page on a non-blog host.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde_json::json;

use super::{CorpusWriter, WebIndexEntry};
use crate::bench::{ManifestSession, SessionManifest};
use crate::model::normalize_email;

pub const REPLICA_DOMAIN: &str = "replica.test";
const SOCIAL_A: &str = "friendbook";
const SOCIAL_B: &str = "chirper";
const WEB: &str = "websearch";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicaSession {
    pub id: u32,
    pub total: u32,
    pub summary: u32,
    pub blog: u32,
}

const CITIES: [&str; 5] = ["Pondicherry", "Chennai", "Madurai", "Bangalore", "Mumbai"];

fn person(session: u32, i: u32) -> String {
    format!("Person S{session} U{i:02}")
}

fn profile_page(name: &str, city: &str, variant: u32) -> String {
    match variant % 3 {
        0 => format!(
            "<html><body><div class=\"h-card\"><span class=\"p-name\">{name}</span>\
             <span class=\"p-locality\">{city}</span><img class=\"u-photo\" src=\"/me.jpg\">\
             </div></body></html>"
        ),
        1 => format!(
            "<html><head><meta name=\"author\" content=\"{name}\">\
             <meta name=\"description\" content=\"Notes from {city}\"></head><body><p>posts</p></body></html>"
        ),
        _ => format!(
            "<html><body><div class=\"vcard\"><span class=\"fn\">{name}</span>\
             <p class=\"note\">Writing since 2009</p></div></body></html>"
        ),
    }
}

/// Writes the corpus under `root` and returns the matching manifest.
pub fn write_table1_replica(root: &Path, sessions: &[ReplicaSession]) -> io::Result<SessionManifest> {
    let writer = CorpusWriter::new(root)?;
    writer.ensure_social_provider(SOCIAL_A)?;
    writer.ensure_social_provider(SOCIAL_B)?;
    let mut index: BTreeMap<String, Vec<WebIndexEntry>> = BTreeMap::new();
    let mut manifest = SessionManifest::default();

    for s in sessions {
        let mut emails = Vec::with_capacity(s.total as usize);
        for i in 0..s.total {
            let address = format!("s{:02}.u{i:02}@{REPLICA_DOMAIN}", s.id);
            let email = normalize_email(&address).map_err(io::Error::other)?;
            let name = person(s.id, i);
            let city = CITIES[(i as usize) % CITIES.len()];

            if i < s.summary {
                match i % 3 {
                    0 => {
                        writer.write_social(SOCIAL_A, &email, &[json!({ "name": name, "gender": "f" })])?;
                    }
                    1 => {
                        writer.write_social(
                            SOCIAL_B,
                            &email,
                            &[json!({ "full_name": name, "profile": { "city": city } })],
                        )?;
                    }
                    _ => {
                        writer.write_social(SOCIAL_A, &email, &[json!({ "name": name, "sex": "M" })])?;
                        writer.write_social(
                            SOCIAL_B,
                            &email,
                            &[json!({ "display_name": name.to_uppercase(), "location": city })],
                        )?;
                    }
                }
            } else if i == s.summary {
                writer.write_social(SOCIAL_A, &email, &[json!({ "gender": "m", "city": city })])?;
            }

            let mut hits = Vec::new();
            let slug = format!("s{:02}u{i:02}", s.id);
            if i < s.blog {
                let blog_url = format!("http://{slug}.blogspot.com/");
                writer.write_page(&blog_url, &profile_page(&name, city, i))?;
                let news_url = format!("http://news.example.com/{slug}");
                writer.write_page(&news_url, "<html><body><p>mentioned</p></body></html>")?;
                hits.push(WebIndexEntry::new(news_url, "News mention", &address));
                hits.push(WebIndexEntry::new(blog_url, format!("{name}'s blog"), &address));
            } else if i == s.blog {
                let blog_url = format!("https://{slug}.wordpress.com/");
                writer.write_page(&blog_url, "<html><body><h1>Nothing here</h1></body></html>")?;
                hits.push(WebIndexEntry::new(blog_url, "Empty blog", &address));
            } else if i == s.blog + 1 {
                let other = format!("http://www.example.org/{slug}/about");
                writer.write_page(&other, &profile_page(&name, city, 0))?;
                hits.push(WebIndexEntry::new(other, "About page", &address));
            }
            if !hits.is_empty() {
                index.insert(email.normalized().to_owned(), hits);
            }
            emails.push(address);
        }
        manifest.sessions.push(ManifestSession { id: s.id, emails });
    }
    writer.write_web_index(WEB, &index)?;
    Ok(manifest)
}
