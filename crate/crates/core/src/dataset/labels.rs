//! One-box-per-line label files: `class cx cy w h`, normalized coordinates.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Traffic light color classes, with their label-file ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LightClass {
    Red = 0,
    Green = 1,
    Yellow = 2,
}

impl LightClass {
    pub const ALL: [LightClass; 3] = [LightClass::Red, LightClass::Green, LightClass::Yellow];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_id(id: i64) -> Option<Self> {
        match id {
            0 => Some(LightClass::Red),
            1 => Some(LightClass::Green),
            2 => Some(LightClass::Yellow),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LightClass::Red => "red",
            LightClass::Green => "green",
            LightClass::Yellow => "yellow",
        }
    }
}

impl fmt::Display for LightClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A labeled box: center and size normalized to the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annotation {
    pub class: LightClass,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl Annotation {
    /// Validated constructor: `cx, cy` in `[0, 1]`, `w, h` in `(0, 1]`.
    pub fn new(class: LightClass, cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(cx) || !in_unit(cy) {
            return Err(Error::param("box", format!("center ({cx}, {cy}) outside [0, 1]")));
        }
        if !(w > 0.0 && w <= 1.0 && h > 0.0 && h <= 1.0) {
            return Err(Error::param("box", format!("size ({w}, {h}) outside (0, 1]")));
        }
        Ok(Self { class, cx, cy, w, h })
    }

    /// Builds from corner coordinates after clipping to the unit square;
    /// `None` when the clipped box has no area.
    pub fn from_corners_clipped(class: LightClass, x1: f64, y1: f64, x2: f64, y2: f64) -> Option<Self> {
        let (x1, x2) = (x1.clamp(0.0, 1.0), x2.clamp(0.0, 1.0));
        let (y1, y2) = (y1.clamp(0.0, 1.0), y2.clamp(0.0, 1.0));
        let (w, h) = (x2 - x1, y2 - y1);
        if !(w > 0.0 && h > 0.0) {
            return None;
        }
        Some(Self {
            class,
            cx: (x1 + x2) / 2.0,
            cy: (y1 + y2) / 2.0,
            w,
            h,
        })
    }

    /// `(x1, y1, x2, y2)` in normalized coordinates.
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )
    }

    pub fn flipped_horizontal(&self) -> Self {
        Self {
            cx: 1.0 - self.cx,
            ..*self
        }
    }
}

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(line, format!("invalid {what} `{tok}`")))
}

fn parse_err(line: usize, message: String) -> Error {
    Error::Parse {
        source_name: None,
        line,
        message,
    }
}

/// Parses a label file. Blank lines are skipped; line numbers in errors are 1-based.
pub fn parse_labels(text: &str) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(parse_err(
                lineno,
                format!("expected `class cx cy w h`, found {} fields", toks.len()),
            ));
        }
        let class_id: i64 = toks[0]
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid class id `{}`", toks[0])))?;
        let class = LightClass::from_id(class_id).ok_or_else(|| {
            Error::Taxonomy(format!("line {lineno}: class id {class_id} is not one of 0, 1, 2"))
        })?;
        let v: Vec<f64> = ["cx", "cy", "w", "h"]
            .iter()
            .zip(&toks[1..])
            .map(|(what, tok)| parse_f64(tok, lineno, what))
            .collect::<Result<_>>()?;
        let ann = Annotation::new(class, v[0], v[1], v[2], v[3])
            .map_err(|e| parse_err(lineno, e.to_string()))?;
        out.push(ann);
    }
    Ok(out)
}

/// Canonical label text: six decimals, one box per line, trailing newline.
pub fn serialize_labels(annotations: &[Annotation]) -> String {
    annotations
        .iter()
        .map(|a| format!("{} {:.6} {:.6} {:.6} {:.6}\n", a.class.id(), a.cx, a.cy, a.w, a.h))
        .collect()
}

/// A box from a source dataset, still carrying the dataset's own class name.
#[derive(Debug, Clone, PartialEq)]
pub struct RawAnnotation {
    pub name: String,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

/// Parses source-dataset labels `name... cx cy w h`; the name is every token
/// before the last four, joined by single spaces (so `wait on` works).
pub fn parse_raw_labels(text: &str) -> Result<Vec<RawAnnotation>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 5 {
            return Err(parse_err(
                lineno,
                format!("expected `name cx cy w h`, found {} fields", toks.len()),
            ));
        }
        let split = toks.len() - 4;
        let v: Vec<f64> = ["cx", "cy", "w", "h"]
            .iter()
            .zip(&toks[split..])
            .map(|(what, tok)| parse_f64(tok, lineno, what))
            .collect::<Result<_>>()?;
        out.push(RawAnnotation {
            name: toks[..split].join(" "),
            cx: v[0],
            cy: v[1],
            w: v[2],
            h: v[3],
        });
    }
    Ok(out)
}

impl FromStr for LightClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "0" | "red" => Ok(LightClass::Red),
            "1" | "green" => Ok(LightClass::Green),
            "2" | "yellow" => Ok(LightClass::Yellow),
            _ => Err(Error::Taxonomy(format!("unknown class `{s}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_a_red_box() {
        let anns = parse_labels("0 0.5 0.5 0.1 0.2").unwrap();
        assert_eq!(
            anns,
            vec![Annotation { class: LightClass::Red, cx: 0.5, cy: 0.5, w: 0.1, h: 0.2 }]
        );
    }

    #[test]
    fn empty_and_blank_text() {
        assert!(parse_labels("").unwrap().is_empty());
        assert!(parse_labels("\n   \n\t\n").unwrap().is_empty());
    }

    #[test]
    fn tolerates_whitespace() {
        let anns = parse_labels("  2\t0.1  0.2 0.05   0.05  \r\n\n1 0.9 0.9 0.1 0.1").unwrap();
        assert_eq!(anns.len(), 2);
        assert_eq!(anns[0].class, LightClass::Yellow);
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let err = parse_labels("0 0.5 0.5 0.1 0.1\n0 0.5 oops 0.1 0.1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_labels("0 0.5 0.5 0.1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_labels("0 1.5 0.5 0.1 0.1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn class_outside_taxonomy() {
        assert!(matches!(parse_labels("3 0.5 0.5 0.1 0.1"), Err(Error::Taxonomy(_))));
    }

    #[test]
    fn raw_labels_keep_multiword_names() {
        let raw = parse_raw_labels("wait on 0.5 0.5 0.1 0.1\nred 0.2 0.2 0.1 0.1").unwrap();
        assert_eq!(raw[0].name, "wait on");
        assert_eq!(raw[1].name, "red");
    }

    fn arb_annotation() -> impl Strategy<Value = Annotation> {
        (0usize..3, 0.0..=1.0f64, 0.0..=1.0f64, 0.001..=1.0f64, 0.001..=1.0f64).prop_map(
            |(c, cx, cy, w, h)| Annotation { class: LightClass::ALL[c], cx, cy, w, h },
        )
    }

    proptest! {
        #[test]
        fn serialization_is_canonical(anns in prop::collection::vec(arb_annotation(), 0..8)) {
            let text = serialize_labels(&anns);
            let parsed = parse_labels(&text).unwrap();
            prop_assert_eq!(parsed.len(), anns.len());
            for (p, a) in parsed.iter().zip(&anns) {
                prop_assert_eq!(p.class, a.class);
                prop_assert!((p.cx - a.cx).abs() <= 5e-7 && (p.w - a.w).abs() <= 5e-7);
            }
            // canonical text is a fixed point
            prop_assert_eq!(serialize_labels(&parsed), text);
        }
    }
}
