//! Semi-supervised data path: confidence filtering of detector output into
//! pseudo-labels, and the half-labeled / half-pseudo-labeled train manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;

use crate::dataset::{Annotation, Manifest, ManifestRecord, Provenance, Split};
use crate::error::{Error, Result};
use crate::metrics::DetectionRecord;
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoLabelPolicy {
    /// Predictions at or above this confidence are kept.
    pub confidence_threshold: f64,
    /// Share of train records that keep their ground-truth labels.
    pub labeled_fraction: f64,
    pub seed: u64,
}

impl Default for PseudoLabelPolicy {
    fn default() -> Self {
        Self {
            confidence_threshold: 0.5,
            labeled_fraction: 0.5,
            seed: 0,
        }
    }
}

impl PseudoLabelPolicy {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("confidence_threshold", self.confidence_threshold),
            ("labeled_fraction", self.labeled_fraction),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::param(name, format!("{v} must lie in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Per-image filtering summary.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterAudit {
    pub image: String,
    pub kept: usize,
    pub dropped: usize,
    pub max_dropped_confidence: Option<f64>,
}

impl FilterAudit {
    pub const HEADER: &'static str = "image\tkept\tdropped\tmax_dropped_confidence\n";

    pub fn to_line(&self) -> String {
        let max = self
            .max_dropped_confidence
            .map(|c| format!("{c:.6}"))
            .unwrap_or_else(|| "-".into());
        format!("{}\t{}\t{}\t{}\n", self.image, self.kept, self.dropped, max)
    }
}

/// Keeps predictions with `confidence >= threshold`, in input order, as label
/// annotations. Boxes that are not valid label boxes count as dropped.
pub fn filter_predictions(preds: &[DetectionRecord<f64>], policy: &PseudoLabelPolicy) -> Vec<Annotation> {
    filter_with_audit(preds, policy, "").0
}

pub fn filter_with_audit(
    preds: &[DetectionRecord<f64>],
    policy: &PseudoLabelPolicy,
    image: &str,
) -> (Vec<Annotation>, FilterAudit) {
    let mut kept = Vec::new();
    let mut audit = FilterAudit {
        image: image.to_string(),
        kept: 0,
        dropped: 0,
        max_dropped_confidence: None,
    };
    for p in preds {
        let ann = (p.confidence >= policy.confidence_threshold)
            .then(|| p.to_annotation())
            .flatten();
        match ann {
            Some(a) => kept.push(a),
            None => {
                audit.dropped += 1;
                audit.max_dropped_confidence = Some(
                    audit
                        .max_dropped_confidence
                        .map_or(p.confidence, |m| m.max(p.confidence)),
                );
            }
        }
    }
    audit.kept = kept.len();
    (kept, audit)
}

pub fn audit_log(entries: &[FilterAudit]) -> String {
    let mut s = String::from(FilterAudit::HEADER);
    for e in entries {
        let _ = write!(s, "{}", e.to_line());
    }
    s
}

/// Seeded partition of the train records into labeled and unlabeled index sets.
/// Both come back in manifest order.
pub fn partition_train(manifest: &Manifest, policy: &PseudoLabelPolicy) -> Result<(Vec<usize>, Vec<usize>)> {
    policy.validate()?;
    let mut train: Vec<usize> = manifest
        .records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| (r.split == Split::Train).then_some(i))
        .collect();
    if train.is_empty() {
        return Err(Error::Manifest("no records are assigned to the train split".into()));
    }
    let n_labeled = (policy.labeled_fraction * train.len() as f64 + 1e-9).floor() as usize;
    train.shuffle(&mut rng_from_seed(derive_seed(policy.seed, "ssl/partition")));
    let mut labeled = train[..n_labeled].to_vec();
    let mut unlabeled = train[n_labeled..].to_vec();
    labeled.sort_unstable();
    unlabeled.sort_unstable();
    Ok((labeled, unlabeled))
}

/// Pseudo-label file expected for a record: `<pseudo_dir>/<image stem>.txt`.
pub fn pseudo_label_path(record: &ManifestRecord, pseudo_dir: &Path) -> PathBuf {
    pseudo_dir.join(format!("{}.txt", record.stem()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SslManifests {
    pub labeled: Manifest,
    pub unlabeled: Manifest,
    /// The full manifest with unlabeled train records pointing at pseudo-label
    /// files (provenance `pseudo`); val and test records are untouched.
    pub mixed: Manifest,
}

/// Builds the three manifests. Every unlabeled train record needs a
/// pseudo-label file in `pseudo_dir`; missing ones are reported together.
pub fn compile_mixed_manifest(
    full: &Manifest,
    policy: &PseudoLabelPolicy,
    pseudo_dir: &Path,
) -> Result<SslManifests> {
    let (labeled, unlabeled) = partition_train(full, policy)?;
    let missing: Vec<PathBuf> = unlabeled
        .iter()
        .map(|&i| pseudo_label_path(&full.records[i], pseudo_dir))
        .filter(|p| !p.is_file())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingPseudoLabels(missing));
    }
    let mut mixed = full.clone();
    for &i in &unlabeled {
        let rec = &mut mixed.records[i];
        rec.label = pseudo_label_path(&full.records[i], pseudo_dir);
        rec.provenance = Provenance::Pseudo;
    }
    let pick = |idx: &[usize]| Manifest {
        records: idx.iter().map(|&i| full.records[i].clone()).collect(),
    };
    Ok(SslManifests {
        labeled: pick(&labeled),
        unlabeled: pick(&unlabeled),
        mixed,
    })
}
