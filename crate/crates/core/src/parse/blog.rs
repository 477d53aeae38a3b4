use scraper::{ElementRef, Html, Selector};
use std::sync::LazyLock;
use url::Url;

use crate::model::{absolute_http_url, BlogProfile};

static CLASSED: LazyLock<Selector> = LazyLock::new(|| Selector::parse("[class]").unwrap());
static META: LazyLock<Selector> = LazyLock::new(|| Selector::parse("meta").unwrap());

const NAME_CLASSES: [&str; 2] = ["fn", "p-name"];
const LOCATION_CLASSES: [&str; 2] = ["locality", "p-locality"];
const PHOTO_CLASSES: [&str; 2] = ["photo", "u-photo"];
const NOTE_CLASSES: [&str; 2] = ["note", "p-note"];

#[derive(Default)]
struct Fields {
    display_name: Option<String>,
    location: Option<String>,
    avatar_url: Option<String>,
    about: Option<String>,
}

/// Lossily decodes `page` and extracts a profile from it.
pub fn extract_blog_profile_bytes(page: &[u8], page_url: &str) -> Option<BlogProfile> {
    extract_blog_profile(&String::from_utf8_lossy(page), page_url)
}

/// Extracts the blogger profile described by a page.
///
/// h-card properties come first (`fn`/`p-name`, `locality`/`p-locality`,
/// `photo`/`u-photo`, `note`/`p-note`, first occurrence in document order).
/// Fields still missing are filled from `<meta name="author">`,
/// `<meta property="og:image">` and `<meta name="description">`. Relative
/// image URLs are resolved against `page_url`.
pub fn extract_blog_profile(page: &str, page_url: &str) -> Option<BlogProfile> {
    let base = Url::parse(page_url).ok();
    let doc = Html::parse_document(page);

    let mut found = Fields::default();
    for el in doc.select(&CLASSED) {
        let has = |names: &[&str]| {
            el.value()
                .classes()
                .any(|c| names.iter().any(|n| c.eq_ignore_ascii_case(n)))
        };
        if found.display_name.is_none() && has(&NAME_CLASSES) {
            found.display_name = element_text(el);
        }
        if found.location.is_none() && has(&LOCATION_CLASSES) {
            found.location = element_text(el);
        }
        if found.avatar_url.is_none() && has(&PHOTO_CLASSES) {
            found.avatar_url = element_link(el).and_then(|l| resolve(base.as_ref(), &l));
        }
        if found.about.is_none() && has(&NOTE_CLASSES) {
            found.about = element_text(el);
        }
    }

    for meta in doc.select(&META) {
        let attr = |name: &str| {
            meta.value()
                .attrs()
                .find(|(k, _)| k.eq_ignore_ascii_case(name))
                .map(|(_, v)| v.trim())
        };
        let key = attr("name").or_else(|| attr("property")).unwrap_or_default();
        let Some(content) = attr("content").and_then(non_empty) else {
            continue;
        };
        if key.eq_ignore_ascii_case("author") && found.display_name.is_none() {
            found.display_name = Some(content);
        } else if key.eq_ignore_ascii_case("og:image") && found.avatar_url.is_none() {
            found.avatar_url = resolve(base.as_ref(), &content);
        } else if key.eq_ignore_ascii_case("description") && found.about.is_none() {
            found.about = Some(content);
        }
    }

    BlogProfile::new(
        page_url,
        found.display_name,
        found.location,
        found.avatar_url,
        found.about,
    )
}

fn non_empty(s: &str) -> Option<String> {
    let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ");
    (!collapsed.is_empty()).then_some(collapsed)
}

fn element_text(el: ElementRef<'_>) -> Option<String> {
    non_empty(&el.text().collect::<String>())
        .or_else(|| el.value().attr("title").and_then(non_empty))
        .or_else(|| el.value().attr("alt").and_then(non_empty))
}

fn element_link(el: ElementRef<'_>) -> Option<String> {
    let v = el.value();
    ["src", "href", "data"]
        .iter()
        .find_map(|a| v.attr(a).and_then(non_empty))
        .or_else(|| element_text(el))
}

fn resolve(base: Option<&Url>, link: &str) -> Option<String> {
    let url = match Url::parse(link) {
        Ok(u) => u,
        Err(url::ParseError::RelativeUrlWithoutBase) => base?.join(link).ok()?,
        Err(_) => return None,
    };
    absolute_http_url(url.as_str()).map(String::from)
}
