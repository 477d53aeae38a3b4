use std::fmt::Write;

use weipe_core::{ConsolidatedIdentity, FieldResolution};

fn field(out: &mut String, label: &str, resolution: Option<&FieldResolution>) {
    let Some(r) = resolution else {
        let _ = writeln!(out, "  {label:<8} -");
        return;
    };
    let sources: Vec<&str> = r
        .supporting_sources()
        .iter()
        .map(|s| s.provider_name.as_str())
        .collect();
    let _ = writeln!(
        out,
        "  {label:<8} {}  [{:.2}; {}]",
        r.value(),
        r.confidence_f64(),
        sources.join(", ")
    );
    for alt in r.alternatives() {
        let names: Vec<&str> = alt.sources.iter().map(|s| s.provider_name.as_str()).collect();
        let _ = writeln!(out, "  {:<8}   also: {} ({})", "", alt.value, names.join(", "));
    }
}

/// Two-section text report: summary fields, then blog profiles.
pub fn report(identity: &ConsolidatedIdentity) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Summary Information");
    let _ = writeln!(out, "  {:<8} {}", "E-mail", identity.email());
    field(&mut out, "Name", identity.name());
    field(&mut out, "Gender", identity.gender());
    field(&mut out, "Place", identity.place());
    field(&mut out, "Image", identity.image());
    let statuses: Vec<String> = identity
        .sources_queried()
        .iter()
        .map(|q| format!("{} {}", q.source.provider_name, q.status.as_str()))
        .collect();
    let _ = writeln!(out, "  {:<8} {}", "Sources", statuses.join(", "));

    let _ = writeln!(out);
    let _ = writeln!(out, "Blog Profiles");
    if identity.blog_profiles().is_empty() {
        let _ = writeln!(out, "  -");
    }
    for blog in identity.blog_profiles() {
        let _ = writeln!(out, "  {}", blog.url());
        for (label, value) in [
            ("Name", blog.display_name()),
            ("Location", blog.location()),
            ("Avatar", blog.avatar_url()),
            ("About", blog.about()),
        ] {
            if let Some(v) = value {
                let _ = writeln!(out, "    {label:<9} {v}");
            }
        }
    }
    out
}
