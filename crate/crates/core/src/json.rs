//! Shared JSON plumbing: parsing with located errors, pretty writing.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Parses a JSON document, turning any failure into a schema error that
/// carries a JSON pointer to the offending field.
pub(crate) fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        pointer: pointer_of(e.path()),
        message: e.inner().to_string(),
    })
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => {
                out.push('/');
                out.push_str(&index.to_string());
            }
            Segment::Map { key } => {
                out.push('/');
                out.push_str(key);
            }
            Segment::Enum { variant } => {
                out.push('/');
                out.push_str(variant);
            }
            Segment::Unknown => {}
        }
    }
    if out.is_empty() {
        "/".to_string()
    } else {
        out
    }
}

/// Reads and parses a JSON file, wrapping every failure with the path.
pub(crate) fn read_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse(&text).map_err(|e| e.in_file(path))
}

/// Writes a value as pretty-printed JSON with a trailing newline.
pub(crate) fn write_file<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::from(e).in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Deserialize)]
    struct Outer {
        #[allow(dead_code)]
        items: Vec<Inner>,
    }

    #[derive(Debug, Deserialize)]
    struct Inner {
        #[allow(dead_code)]
        value: f64,
    }

    #[test]
    fn type_errors_carry_a_pointer() {
        let err = parse::<Outer>(r#"{"items":[{"value":1.0},{"value":"x"}]}"#).unwrap_err();
        match err {
            Error::Schema { pointer, .. } => assert_eq!(pointer, "/items/1/value"),
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn missing_fields_are_located_at_their_parent() {
        let err = parse::<Outer>(r#"{"items":[{}]}"#).unwrap_err();
        match err {
            Error::Schema { pointer, message } => {
                assert_eq!(pointer, "/items/0");
                assert!(message.contains("value"), "{message}");
            }
            other => panic!("expected schema error, got {other}"),
        }
    }
}
