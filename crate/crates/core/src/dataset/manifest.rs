//! Dataset manifests: `image_path<TAB>label_path<TAB>provenance<TAB>split` per line.
//!
//! Relative paths in a manifest file are relative to the file's directory.
//! [`Manifest::load`] resolves them and [`Manifest::save`] writes paths under
//! the manifest's directory back in relative form.

use std::collections::HashSet;
use std::fmt;
use std::path::{Component, Path, PathBuf};
use std::str::FromStr;

use super::labels::{parse_labels, Annotation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Original,
    Augmented,
    Fda,
    Weather,
    Pseudo,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Original => "original",
            Provenance::Augmented => "augmented",
            Provenance::Fda => "fda",
            Provenance::Weather => "weather",
            Provenance::Pseudo => "pseudo",
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "original" => Provenance::Original,
            "augmented" => Provenance::Augmented,
            "fda" => Provenance::Fda,
            "weather" => Provenance::Weather,
            "pseudo" => Provenance::Pseudo,
            other => return Err(Error::Manifest(format!("unknown provenance `{other}`"))),
        })
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
    Unassigned,
}

impl Split {
    pub const ASSIGNED: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
            Split::Unassigned => "unassigned",
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "train" => Split::Train,
            "val" => Split::Val,
            "test" => Split::Test,
            "unassigned" => Split::Unassigned,
            other => return Err(Error::Manifest(format!("unknown split `{other}`"))),
        })
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub image: PathBuf,
    pub label: PathBuf,
    pub provenance: Provenance,
    pub split: Split,
}

impl ManifestRecord {
    pub fn new(image: impl Into<PathBuf>, label: impl Into<PathBuf>, provenance: Provenance) -> Self {
        Self {
            image: image.into(),
            label: label.into(),
            provenance,
            split: Split::Unassigned,
        }
    }

    /// Stable identifier used for seed derivation and output naming: the image file stem.
    pub fn stem(&self) -> String {
        self.image
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    pub fn read_labels(&self) -> Result<Vec<Annotation>> {
        let text = std::fs::read_to_string(&self.label).map_err(|e| Error::io(&self.label, e))?;
        parse_labels(&text).map_err(|e| e.with_source_name(self.label.display().to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
}

/// Drops `.` and folds `name/..` pairs without touching the filesystem.
fn normalize(path: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for c in path.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir if matches!(out.components().next_back(), Some(Component::Normal(_))) => {
                out.pop();
            }
            c => out.push(c),
        }
    }
    out
}

impl Manifest {
    pub fn new(records: Vec<ManifestRecord>) -> Result<Self> {
        let m = Self { records };
        m.check_unique()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn check_unique(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(&r.image) {
                return Err(Error::Manifest(format!(
                    "image path `{}` appears more than once",
                    r.image.display()
                )));
            }
        }
        Ok(())
    }

    /// Parses manifest text, joining relative paths onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    source_name: None,
                    line: i + 1,
                    message: format!("expected 4 tab-separated fields, found {}", fields.len()),
                });
            }
            let wrap = |e: Error| Error::Parse {
                source_name: None,
                line: i + 1,
                message: e.to_string(),
            };
            records.push(ManifestRecord {
                image: normalize(&base.join(fields[0])),
                label: normalize(&base.join(fields[1])),
                provenance: fields[2].parse().map_err(wrap)?,
                split: fields[3].trim_end().parse().map_err(wrap)?,
            });
        }
        Self::new(records)
    }

    /// Manifest text with paths written relative to `base`, climbing with
    /// `..` when needed; a path with no relative form stays as is.
    pub fn to_text(&self, base: &Path) -> String {
        let rel = |p: &Path| -> String {
            let shown = match pathdiff::diff_paths(p, base) {
                Some(r) if !base.as_os_str().is_empty() && !r.as_os_str().is_empty() => r,
                _ => p.to_path_buf(),
            };
            shown.to_string_lossy().replace('\\', "/")
        };
        self.records
            .iter()
            .map(|r| {
                format!(
                    "{}\t{}\t{}\t{}\n",
                    rel(&r.image),
                    rel(&r.label),
                    r.provenance,
                    r.split
                )
            })
            .collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base).map_err(|e| e.with_source_name(path.display().to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new(""));
        std::fs::write(path, self.to_text(base)).map_err(|e| Error::io(path, e))
    }

    /// Reads every record's label file; fails on the first unparsable one.
    pub fn read_all_labels(&self) -> Result<Vec<Vec<Annotation>>> {
        self.records.iter().map(ManifestRecord::read_labels).collect()
    }

    pub fn split_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for r in &self.records {
            counts[match r.split {
                Split::Train => 0,
                Split::Val => 1,
                Split::Test => 2,
                Split::Unassigned => 3,
            }] += 1;
        }
        counts
    }

    pub fn filter_split(&self, split: Split) -> Manifest {
        Manifest {
            records: self.records.iter().filter(|r| r.split == split).cloned().collect(),
        }
    }
}
