//! Mapping of source-dataset class names onto the three light colors.
//!
//! File format: one `raw_name=class_id` or `raw_name=EXCLUDE` per line, `#`
//! comments. Names may contain spaces; the split happens at the last `=`.

use std::collections::BTreeMap;
use std::path::Path;

use super::labels::{Annotation, LightClass, RawAnnotation};
use crate::error::{Error, Result};

const EXCLUDE: &str = "EXCLUDE";

/// Default mapping for LISA annotation tags. Arrow variants map to their base color.
pub const LISA_TAXONOMY: &str = "\
# LISA traffic light tags
go=1
goForward=1
goLeft=1
stop=0
stopLeft=0
warning=2
warningLeft=2
";

/// Default mapping for S2TLD classes.
pub const S2TLD_TAXONOMY: &str = "\
# S2TLD classes
red=0
green=1
yellow=2
off=EXCLUDE
wait on=EXCLUDE
";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaxonomyMap {
    entries: BTreeMap<String, Option<LightClass>>,
}

impl TaxonomyMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                source_name: None,
                line: i + 1,
                message,
            };
            let (name, value) = line
                .rsplit_once('=')
                .ok_or_else(|| parse_err(format!("expected `name=class_id|EXCLUDE`, got `{line}`")))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(parse_err("empty class name".into()));
            }
            let value = value.trim();
            let mapped = if value == EXCLUDE {
                None
            } else {
                let id: i64 = value
                    .parse()
                    .map_err(|_| parse_err(format!("invalid class id `{value}`")))?;
                Some(LightClass::from_id(id).ok_or_else(|| {
                    Error::Taxonomy(format!("`{name}` maps to {id}, which is not 0, 1 or 2"))
                })?)
            };
            if entries.insert(name.to_string(), mapped).is_some() {
                return Err(Error::Taxonomy(format!("`{name}` is registered twice")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.with_source_name(path.display().to_string()))
    }

    /// `red=0`, `green=1`, `yellow=2`.
    pub fn identity() -> Self {
        let entries = LightClass::ALL
            .iter()
            .map(|c| (c.name().to_string(), Some(*c)))
            .collect();
        Self { entries }
    }

    pub fn lisa() -> Self {
        Self::parse(LISA_TAXONOMY).expect("built-in taxonomy parses")
    }

    pub fn s2tld() -> Self {
        Self::parse(S2TLD_TAXONOMY).expect("built-in taxonomy parses")
    }

    /// Built-in taxonomy by name: `identity`, `lisa` or `s2tld`.
    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "identity" => Some(Self::identity()),
            "lisa" => Some(Self::lisa()),
            "s2tld" => Some(Self::s2tld()),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(name, class)| match class {
                Some(c) => format!("{name}={}\n", c.id()),
                None => format!("{name}={EXCLUDE}\n"),
            })
            .collect()
    }
}

/// Maps a source class name. `Ok(None)` means the class is excluded;
/// an unregistered name is an error.
pub fn map_class(raw_name: &str, taxonomy: &TaxonomyMap) -> Result<Option<LightClass>> {
    taxonomy
        .entries
        .get(raw_name)
        .copied()
        .ok_or_else(|| Error::Taxonomy(format!("class `{raw_name}` is not registered in the taxonomy")))
}

/// Converts raw boxes, dropping excluded classes. Boxes are clipped to the unit
/// square; boxes with no area left are dropped.
pub fn map_raw_annotations(raw: &[RawAnnotation], taxonomy: &TaxonomyMap) -> Result<Vec<Annotation>> {
    let mut out = Vec::with_capacity(raw.len());
    for r in raw {
        if let Some(class) = map_class(&r.name, taxonomy)? {
            let (x1, y1) = (r.cx - r.w / 2.0, r.cy - r.h / 2.0);
            if let Some(a) = Annotation::from_corners_clipped(class, x1, y1, x1 + r.w, y1 + r.h) {
                out.push(a);
            }
        }
    }
    Ok(out)
}
