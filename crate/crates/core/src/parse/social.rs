use serde_json::{Map, Value};

use super::FieldMappingRules;
use crate::model::{absolute_http_url, non_blank, Gender, ProfileQuadruple, SocialResultItem};

/// Maps one social payload onto the profile quadruple.
///
/// For every slot the keys are tried in rule order; each key is looked up at
/// the top level first and then one level down (inside nested objects, in
/// payload order). The first usable value wins. Never fails.
pub fn parse_social_item(item: &SocialResultItem, rules: &FieldMappingRules) -> ProfileQuadruple {
    parse_payload(&item.payload, rules)
}

pub(crate) fn parse_payload(payload: &Map<String, Value>, rules: &FieldMappingRules) -> ProfileQuadruple {
    let name = find(payload, rules.name_keys(), text);
    let place = find(payload, rules.place_keys(), text);
    let image = find(payload, rules.image_keys(), |v| {
        text(v).filter(|s| absolute_http_url(s).is_some())
    });
    let gender = find(payload, rules.gender_keys(), |v| match v {
        Value::String(s) => Some(Gender::from_label(s)).filter(|g| *g != Gender::Unspecified),
        _ => None,
    })
    .unwrap_or_default();
    ProfileQuadruple::new(name.as_deref(), gender, place.as_deref(), image.as_deref())
}

fn text(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => non_blank(s),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn find<T>(
    payload: &Map<String, Value>,
    keys: &[String],
    usable: impl Fn(&Value) -> Option<T>,
) -> Option<T> {
    let matching = |map: &Map<String, Value>, key: &str| -> Option<T> {
        map.iter()
            .filter(|(k, _)| k.to_lowercase() == key)
            .find_map(|(_, v)| usable(v))
    };
    keys.iter().find_map(|key| {
        let key = key.to_lowercase();
        matching(payload, &key).or_else(|| {
            payload.values().find_map(|v| match v {
                Value::Object(nested) => matching(nested, &key),
                _ => None,
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SourceId;
    use proptest::prelude::*;
    use serde_json::json;

    fn item(payload: Value) -> SocialResultItem {
        SocialResultItem {
            source: SourceId::social("s"),
            rank: 1,
            payload: payload.as_object().cloned().unwrap(),
        }
    }

    fn parse(payload: Value) -> ProfileQuadruple {
        parse_social_item(&item(payload), &FieldMappingRules::default())
    }

    #[test]
    fn direct_mapping() {
        let q = parse(json!({
            "name": "Alice", "gender": "female", "location": "Pondicherry", "avatar": "http://x/a.png"
        }));
        assert_eq!(
            q,
            ProfileQuadruple::new(Some("Alice"), Gender::Female, Some("Pondicherry"), Some("http://x/a.png"))
        );
    }

    #[test]
    fn empty_payload() {
        let q = parse(json!({}));
        assert_eq!(q, ProfileQuadruple::new(None, Gender::Unspecified, None, None));
    }

    #[test]
    fn gender_normalization_and_one_level_nesting() {
        let q = parse(json!({ "sex": "M", "profile": { "city": "Chennai" } }));
        assert_eq!(q, ProfileQuadruple::new(None, Gender::Male, Some("Chennai"), None));
    }

    #[test]
    fn keys_match_case_insensitively() {
        let q = parse(json!({ "Full_Name": "Bob Stone", "CITY": "Madurai" }));
        assert_eq!(q.name(), Some("Bob Stone"));
        assert_eq!(q.place(), Some("Madurai"));
    }

    #[test]
    fn rule_order_beats_nesting_depth() {
        // "name" is tried at both depths before "full_name" is considered.
        let q = parse(json!({ "full_name": "Top", "user": { "name": "Nested" } }));
        assert_eq!(q.name(), Some("Nested"));
    }

    #[test]
    fn deeper_nesting_is_ignored() {
        let q = parse(json!({ "a": { "b": { "name": "Too deep" } } }));
        assert_eq!(q.name(), None);
    }

    #[test]
    fn unusable_values_fall_through() {
        let q = parse(json!({
            "name": "  ", "full_name": "Carol",
            "image": "/relative.png", "photo": "https://cdn.example/c.jpg",
            "gender": "unknown", "sex": "woman",
            "location": null, "place": 600001
        }));
        assert_eq!(q.name(), Some("Carol"));
        assert_eq!(q.image(), Some("https://cdn.example/c.jpg"));
        assert_eq!(q.gender(), Gender::Female);
        assert_eq!(q.place(), Some("600001"));
    }

    #[test]
    fn unrecognized_gender_is_unspecified() {
        assert_eq!(parse(json!({ "gender": "n/a" })).gender(), Gender::Unspecified);
        assert_eq!(parse(json!({ "gender": 1 })).gender(), Gender::Unspecified);
    }

    fn leaf() -> impl Strategy<Value = Value> {
        prop_oneof![
            "[a-zA-Z ]{0,8}".prop_map(Value::from),
            any::<i32>().prop_map(Value::from),
            Just(Value::Null),
            prop::sample::select(vec!["m", "female", "x", "http://i.example/p.png"]).prop_map(Value::from),
        ]
    }

    fn payload() -> impl Strategy<Value = Map<String, Value>> {
        let key = prop::sample::select(vec![
            "name", "Name", "full_name", "display_name", "nick", "gender", "sex", "city",
            "location", "locality", "avatar", "photo", "image", "extra", "profile",
        ]);
        let nested = prop::collection::vec((key.clone(), leaf()), 0..4)
            .prop_map(|kv| Value::Object(kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()));
        prop::collection::vec((key, prop_oneof![3 => leaf(), 1 => nested]), 0..8)
            .prop_map(|kv| kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    proptest! {
        #[test]
        fn appending_a_key_never_changes_a_present_field(p in payload(), extra in "[a-z_]{1,10}") {
            let base = FieldMappingRules::default();
            let before = parse_payload(&p, &base);
            let push = |mut v: Vec<String>| { v.push(extra.clone()); v };
            let extended = FieldMappingRules::new(
                push(base.name_keys().to_vec()),
                push(base.gender_keys().to_vec()),
                push(base.place_keys().to_vec()),
                push(base.image_keys().to_vec()),
            ).unwrap();
            let after = parse_payload(&p, &extended);
            if before.name().is_some() { prop_assert_eq!(before.name(), after.name()); }
            if before.place().is_some() { prop_assert_eq!(before.place(), after.place()); }
            if before.image().is_some() { prop_assert_eq!(before.image(), after.image()); }
            if before.gender() != Gender::Unspecified { prop_assert_eq!(before.gender(), after.gender()); }
        }
    }
}
