//! JSON point files: `{"n": 6, "coords": ["1/2", "0", ...], "label": "..."}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pedigree::CharVector;
use crate::rational::{format, parse};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Text(String),
    Int(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointFile {
    pub n: usize,
    pub coords: Vec<Coord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl PointFile {
    pub fn from_point(x: &CharVector, label: Option<String>) -> PointFile {
        PointFile { n: x.n(), coords: x.coords().iter().map(|c| Coord::Text(format(c))).collect(), label }
    }

    pub fn to_point(&self) -> Result<CharVector> {
        let coords = self
            .coords
            .iter()
            .map(|c| match c {
                Coord::Text(s) => parse(s),
                Coord::Int(v) => Ok(crate::rational::int(*v)),
            })
            .collect::<Result<Vec<_>>>()?;
        CharVector::from_any(self.n, coords)
    }
}

pub fn parse_point_file(text: &str) -> Result<PointFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_point(path: &Path) -> Result<(CharVector, Option<String>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let file = parse_point_file(&text)?;
    Ok((file.to_point()?, file.label))
}

pub fn to_json(x: &CharVector, label: Option<String>) -> String {
    serde_json::to_string_pretty(&PointFile::from_point(x, label)).expect("point files serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn roundtrip() {
        let x = CharVector::new(5, [0, 1, 2, 0, 1, 0, 1, 2, 2].iter().map(|&v| ratio(v, 6)).collect()).unwrap();
        let text = to_json(&x, Some("fat".into()));
        let file = parse_point_file(&text).unwrap();
        assert_eq!(file.label.as_deref(), Some("fat"));
        assert_eq!(file.to_point().unwrap(), x);
    }

    #[test]
    fn integers_and_full_form() {
        let file = parse_point_file(r#"{"n": 4, "coords": [1, "1/2", "1/2", 0]}"#).unwrap();
        assert_eq!(file.to_point().unwrap().coords(), &[ratio(1, 2), ratio(1, 2), ratio(0, 1)]);
    }

    #[test]
    fn malformed() {
        assert!(parse_point_file(r#"{"n": 4, "coords": ["1/2""#).is_err());
        let bad_den = parse_point_file(r#"{"n": 4, "coords": ["1/0", "0", "1"]}"#).unwrap();
        assert!(bad_den.to_point().is_err());
        let short = parse_point_file(r#"{"n": 5, "coords": ["1", "0", "0"]}"#).unwrap();
        assert!(short.to_point().is_err());
    }
}
