"""Smoke test for the `weipe` extension module.

Build and install first:

    pip install maturin
    (cd crates/py && maturin build --release -o dist) && pip install crates/py/dist/weipe-*.whl
    python python/smoke_test.py
"""

import json
from fractions import Fraction
from pathlib import Path

import weipe

DEMO = Path(__file__).resolve().parent.parent / "demo"


def check_parsers():
    assert weipe.normalize_email("  Alice@Example.COM ") == "alice@example.com"
    try:
        weipe.normalize_email("not-an-address")
    except ValueError:
        pass
    else:
        raise AssertionError("invalid address accepted")

    fields = weipe.parse_social_item(
        {"full_name": "Bob Stone", "profile": {"city": "Chennai"}, "sex": "M", "avatar": "ftp://x"}
    )
    assert fields == {"name": "Bob Stone", "gender": "male", "place": "Chennai", "image": None}, fields

    page = '<div class="h-card"><span class="p-name">Ann</span><img class="u-photo" src="me.png"></div>'
    profile = weipe.extract_blog_profile(page, "http://ann.blogspot.com/about/")
    assert profile["display_name"] == "Ann"
    assert profile["avatar_url"] == "http://ann.blogspot.com/about/me.png"
    assert weipe.extract_blog_profile(b"\xff\xfe<p>nothing</p>", "http://x.org/") is None

    assert weipe.classify_blog_candidate("http://ann.wordpress.com/post")
    assert not weipe.classify_blog_candidate("http://news.example.com/story")


def check_metrics():
    rows = weipe.table1()
    assert len(rows) == 10 and all(s >= b for _, _, s, b in rows)
    summary = weipe.aggregate(rows)
    assert Fraction(summary["summary_rate"]["fraction"]) == Fraction(139, 200)
    assert Fraction(summary["blog_rate"]["fraction"]) == Fraction(104, 200)


def check_engine():
    assert weipe.validate_corpus(DEMO / "corpus") == []
    engine = weipe.Engine(config=DEMO / "weipe.json", fixed_time="2011-05-01T10:00:00Z")
    assert engine.providers == 4
    body = engine.identify("alice@example.com")
    assert body["summary_success"] and body["blog_success"]
    assert body["summary"]["name"]["value"] == "Alice Martin"
    assert body["generated_at"] == "2011-05-01T10:00:00.000Z"

    replica = weipe.Engine(corpus=DEMO / "table1" / "corpus")
    manifest = json.loads((DEMO / "table1" / "manifest.json").read_text())
    first = manifest["sessions"][0]
    assert replica.run_session(first["id"], first["emails"]) == rows_for(1)


def rows_for(session):
    return next(r for r in weipe.table1() if r[0] == session)


if __name__ == "__main__":
    check_parsers()
    check_metrics()
    check_engine()
    print("weipe smoke test ok")
